#pragma once

#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rocq::diagnostics {

enum class Severity { Error, Warning };

struct Diagnostic {
  std::string file;
  int line = 1;       // 1-based
  int col_start = 0;  // 0-based byte offset within the line
  int col_end = 0;    // exclusive
  Severity severity = Severity::Error;
  std::string message;
  std::optional<std::string> excerpt;

  bool operator==(const Diagnostic&) const = default;
};

enum class ErrorCategory {
  UnresolvedReference,
  TypeMismatch,
  ScopeAmbiguity,
  OpenGoals,
  SyntaxError,
  Timeout,
  ImportFailure,
  Other,
};

std::string_view to_string(Severity s);
std::string_view to_string(ErrorCategory c);
std::optional<ErrorCategory> category_from_string(std::string_view name);

void to_json(nlohmann::json& j, const Diagnostic& d);
void from_json(const nlohmann::json& j, Diagnostic& d);

// Parses `File "...", line N, characters A-B:` blocks. Never throws.
// Text before the first header is compiler chatter (Check/Print output)
// unless it contains a line starting with "Error", in which case it becomes
// an unlocated Error diagnostic at line 1, columns 0-0.
std::vector<Diagnostic> parse_compiler_output(std::string_view raw, std::string_view source);

// Byte-deterministic annotated report:
//
//   p.v:3:7-12: error:
//   <source line>
//          ^^^^^
//   <message>
//   <blank>
//   ...
//   1 error(s), 0 warning(s)
std::string render_report(const std::vector<Diagnostic>& diags, std::string_view source);

// Pieces of render_report, for reports whose diagnostics refer to different
// texts: one annotated block (ending with the blank separator line), and the
// closing summary line.
std::string render_diagnostic(const Diagnostic& d, std::string_view source);
std::string render_summary(const std::vector<Diagnostic>& diags);

// Ordered message-pattern table; first matching rule wins, no match is Other.
// Data format, one rule per line: `Category<TAB>regex` (case-insensitive).
// The pattern `@numeric-scope-clash` names the built-in scope detector.
class CategoryRules {
 public:
  static const CategoryRules& defaults();
  static std::string_view default_table();
  // Throws Error{InvalidConfig} on unknown categories or bad patterns.
  static CategoryRules parse(std::string_view doc);

  ErrorCategory classify(const Diagnostic& d) const;
  std::size_t size() const { return rules_.size(); }

 private:
  struct Rule {
    ErrorCategory category;
    bool scope_clash = false;
    std::regex pattern;
  };
  std::vector<Rule> rules_;
};

ErrorCategory classify_error(const Diagnostic& d, const CategoryRules& rules = CategoryRules::defaults());

// A unification failure whose text names at least two distinct numeric
// scopes or numeric types (nat, N, Z, positive, Q, R).
bool is_numeric_scope_clash(std::string_view message);

}  // namespace rocq::diagnostics
