#include "rocq/diagnostics/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "rocq/common/error.hpp"
#include "rocq/common/text.hpp"
#include "rocq/embedded/error_categories.hpp"

namespace rocq::diagnostics {

std::string_view to_string(Severity s) { return s == Severity::Error ? "error" : "warning"; }

namespace {

constexpr std::pair<ErrorCategory, std::string_view> kCategoryNames[] = {
    {ErrorCategory::UnresolvedReference, "UnresolvedReference"},
    {ErrorCategory::TypeMismatch, "TypeMismatch"},
    {ErrorCategory::ScopeAmbiguity, "ScopeAmbiguity"},
    {ErrorCategory::OpenGoals, "OpenGoals"},
    {ErrorCategory::SyntaxError, "SyntaxError"},
    {ErrorCategory::Timeout, "Timeout"},
    {ErrorCategory::ImportFailure, "ImportFailure"},
    {ErrorCategory::Other, "Other"},
};

// Rule matching looks at a bounded prefix: goal dumps inside messages can be
// very long and std::regex recursion grows with input size.
constexpr std::size_t kClassifyWindow = 4096;

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct Header {
  std::string file;
  int line;
  int col_start;
  int col_end;
  std::string rest;  // text after the closing colon on the same line
};

std::optional<Header> parse_header(std::string_view line) {
  static const std::regex re(R"re(^File "([^"]*)", line (\d+), characters (\d+)-(\d+):(.*)$)re");
  std::string s(line);
  if (!s.empty() && s.back() == '\r') s.pop_back();
  std::smatch m;
  if (!std::regex_match(s, m, re)) return std::nullopt;
  auto l = parse_int(m.str(2));
  auto a = parse_int(m.str(3));
  auto b = parse_int(m.str(4));
  if (!l || !a || !b) return std::nullopt;
  Header h{m.str(1), std::max(*l, 1), std::min(*a, *b), std::max(*a, *b), m.str(5)};
  return h;
}

std::string finish_message(std::string_view body, Severity& severity) {
  auto msg = text::trim(body);
  severity = Severity::Error;
  if (msg.starts_with("Warning:")) {
    severity = Severity::Warning;
    msg.remove_prefix(8);
  } else if (msg.starts_with("Error:")) {
    msg.remove_prefix(6);
  }
  msg = text::trim(msg);
  if (msg.empty()) return "(no message)";
  return std::string(msg);
}

std::optional<std::string> source_line(std::string_view source, int line) {
  auto lines = text::split_lines(source);
  if (line < 1 || static_cast<std::size_t>(line) > lines.size()) return std::nullopt;
  auto l = lines[static_cast<std::size_t>(line - 1)];
  if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  return std::string(l);
}

std::string join(const std::vector<std::string_view>& lines, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (i > from) out += '\n';
    out += lines[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(ErrorCategory c) {
  for (const auto& [cat, name] : kCategoryNames) {
    if (cat == c) return name;
  }
  return "Other";
}

std::optional<ErrorCategory> category_from_string(std::string_view name) {
  for (const auto& [cat, n] : kCategoryNames) {
    if (n == name) return cat;
  }
  return std::nullopt;
}

void to_json(nlohmann::json& j, const Diagnostic& d) {
  j = nlohmann::json{{"file", d.file},         {"line", d.line},
                     {"col_start", d.col_start}, {"col_end", d.col_end},
                     {"severity", to_string(d.severity)}, {"message", d.message}};
  if (d.excerpt) j["excerpt"] = *d.excerpt;
}

void from_json(const nlohmann::json& j, Diagnostic& d) {
  d.file = j.at("file").get<std::string>();
  d.line = j.at("line").get<int>();
  d.col_start = j.at("col_start").get<int>();
  d.col_end = j.at("col_end").get<int>();
  d.severity = j.at("severity").get<std::string>() == "warning" ? Severity::Warning : Severity::Error;
  d.message = j.at("message").get<std::string>();
  d.excerpt.reset();
  if (j.contains("excerpt")) d.excerpt = j["excerpt"].get<std::string>();
}

std::vector<Diagnostic> parse_compiler_output(std::string_view raw, std::string_view source) {
  std::vector<Diagnostic> out;
  auto lines = text::split_lines(raw);

  std::vector<std::size_t> header_at;
  std::vector<Header> headers;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!lines[i].starts_with("File \"")) continue;
    if (auto h = parse_header(lines[i])) {
      header_at.push_back(i);
      headers.push_back(std::move(*h));
    }
  }

  const std::size_t prefix_end = header_at.empty() ? lines.size() : header_at.front();
  for (std::size_t i = 0; i < prefix_end; ++i) {
    if (!text::trim(lines[i]).starts_with("Error")) continue;
    Diagnostic d;
    Severity ignored;
    d.message = finish_message(join(lines, i, prefix_end), ignored);
    d.excerpt = source_line(source, 1);
    out.push_back(std::move(d));
    break;
  }

  for (std::size_t k = 0; k < headers.size(); ++k) {
    const std::size_t end = k + 1 < header_at.size() ? header_at[k + 1] : lines.size();
    std::string body = headers[k].rest;
    if (header_at[k] + 1 < end) {
      if (!text::trim(body).empty()) body += '\n';
      body += join(lines, header_at[k] + 1, end);
    }
    Diagnostic d;
    d.file = headers[k].file;
    d.line = headers[k].line;
    d.col_start = headers[k].col_start;
    d.col_end = headers[k].col_end;
    d.message = finish_message(body, d.severity);
    d.excerpt = source_line(source, d.line);
    out.push_back(std::move(d));
  }
  return out;
}

std::string render_diagnostic(const Diagnostic& d, std::string_view source) {
  std::string out = d.file + ":" + std::to_string(d.line) + ":" + std::to_string(d.col_start) + "-" +
                    std::to_string(d.col_end) + ": " + std::string(to_string(d.severity)) + ":\n";
  if (auto excerpt = source_line(source, d.line)) {
    out += *excerpt;
    out += '\n';
    // Ranges may run past the end of the line (multi-line spans); the
    // underline stops at the line end but always shows at least one caret.
    const int len = static_cast<int>(excerpt->size());
    if (d.col_start >= 0 && d.col_start <= len) {
      const int stop = std::min(d.col_end, len);
      out.append(static_cast<std::size_t>(d.col_start), ' ');
      out.append(static_cast<std::size_t>(std::max(1, stop - d.col_start)), '^');
      out += '\n';
    }
  }
  out += d.message;
  out += "\n\n";
  return out;
}

std::string render_summary(const std::vector<Diagnostic>& diags) {
  auto errors = std::count_if(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
  auto warnings = static_cast<std::ptrdiff_t>(diags.size()) - errors;
  return std::to_string(errors) + " error(s), " + std::to_string(warnings) + " warning(s)\n";
}

std::string render_report(const std::vector<Diagnostic>& diags, std::string_view source) {
  std::string out;
  for (const auto& d : diags) out += render_diagnostic(d, source);
  return out + render_summary(diags);
}

bool is_numeric_scope_clash(std::string_view message) {
  std::string msg(message.substr(0, std::min(message.size(), kClassifyWindow)));
  static const std::regex unify(R"(expected to have type|unable to unify|cannot unify|impossible to unify|not convertible)",
                                std::regex::icase);
  if (!std::regex_search(msg, unify)) return false;
  static const std::regex scope(R"re(\b(nat|N|Z|positive|Q|R)_scope\b|%(nat|N|Z|positive|Q|R)\b|"(nat|N|Z|positive|Q|R)")re");
  std::set<std::string> seen;
  for (auto it = std::sregex_iterator(msg.begin(), msg.end(), scope); it != std::sregex_iterator(); ++it) {
    for (int g = 1; g <= 3; ++g) {
      if ((*it)[g].matched) seen.insert((*it)[g].str());
    }
  }
  return seen.size() >= 2;
}

std::string_view CategoryRules::default_table() { return embedded::error_categories; }

const CategoryRules& CategoryRules::defaults() {
  static const CategoryRules rules = parse(default_table());
  return rules;
}

CategoryRules CategoryRules::parse(std::string_view doc) {
  CategoryRules rules;
  for (const auto& line : text::data_lines(doc)) {
    auto tab = line.find('\t');
    if (tab == std::string::npos) raise(ErrorKind::InvalidConfig, "category rule without a tab: " + line);
    auto name = text::trim(std::string_view(line).substr(0, tab));
    auto pattern = std::string(text::trim(std::string_view(line).substr(tab + 1)));
    auto cat = category_from_string(name);
    if (!cat) raise(ErrorKind::InvalidConfig, "unknown error category: " + std::string(name));
    if (pattern.empty()) raise(ErrorKind::InvalidConfig, "empty pattern for " + std::string(name));
    Rule rule{*cat, pattern == "@numeric-scope-clash", {}};
    if (!rule.scope_clash) {
      try {
        rule.pattern = std::regex(pattern, std::regex::icase | std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        raise(ErrorKind::InvalidConfig, "bad pattern for " + std::string(name) + ": " + e.what());
      }
    }
    rules.rules_.push_back(std::move(rule));
  }
  return rules;
}

ErrorCategory CategoryRules::classify(const Diagnostic& d) const {
  if (text::trim(d.message).empty()) return ErrorCategory::Other;
  const std::string msg = text::collapse_whitespace(
      std::string_view(d.message).substr(0, std::min(d.message.size(), kClassifyWindow)));
  for (const auto& rule : rules_) {
    if (rule.scope_clash ? is_numeric_scope_clash(msg) : std::regex_search(msg, rule.pattern)) {
      return rule.category;
    }
  }
  return ErrorCategory::Other;
}

ErrorCategory classify_error(const Diagnostic& d, const CategoryRules& rules) { return rules.classify(d); }

}  // namespace rocq::diagnostics
