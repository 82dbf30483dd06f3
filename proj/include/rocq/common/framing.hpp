#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>

// Message framing for JSON-RPC streams: one object per line, or
// `Content-Length:` headers as used by language-server style engines.
namespace rocq::framing {

enum class Framing { Lines, ContentLength };

std::string encode(std::string_view payload, Framing framing);

// Incremental decoder for byte chunks arriving from a pipe.
class Decoder {
 public:
  explicit Decoder(Framing framing) : framing_(framing) {}

  void feed(std::string_view bytes) { buffer_.append(bytes); }
  // Next complete message, if any. Blank lines are skipped in line mode.
  std::optional<std::string> next();

 private:
  Framing framing_;
  std::string buffer_;
};

// Blocking read of one message. std::nullopt at end of stream.
std::optional<std::string> read_message(std::istream& in, Framing framing);

}  // namespace rocq::framing
