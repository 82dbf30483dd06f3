#include "rocq/common/framing.hpp"

#include <charconv>

#include "rocq/common/text.hpp"

namespace rocq::framing {

namespace {

std::optional<std::size_t> content_length(std::string_view headers) {
  for (auto line : text::split_lines(headers)) {
    line = text::trim(line);
    constexpr std::string_view kKey = "content-length:";
    if (line.size() < kKey.size()) continue;
    bool match = true;
    for (std::size_t i = 0; i < kKey.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(line[i])) != kKey[i]) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    auto value = text::trim(line.substr(kKey.size()));
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
    if (ec == std::errc()) return n;
  }
  return std::nullopt;
}

}  // namespace

std::string encode(std::string_view payload, Framing framing) {
  if (framing == Framing::Lines) {
    std::string out(payload);
    out.push_back('\n');
    return out;
  }
  std::string out = "Content-Length: " + std::to_string(payload.size()) + "\r\n\r\n";
  out.append(payload);
  return out;
}

std::optional<std::string> Decoder::next() {
  if (framing_ == Framing::Lines) {
    while (true) {
      auto nl = buffer_.find('\n');
      if (nl == std::string::npos) return std::nullopt;
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!text::trim(line).empty()) return line;
    }
  }
  auto sep = buffer_.find("\r\n\r\n");
  std::size_t sep_len = 4;
  if (sep == std::string::npos) {
    sep = buffer_.find("\n\n");
    sep_len = 2;
  }
  if (sep == std::string::npos) return std::nullopt;
  auto len = content_length(std::string_view(buffer_).substr(0, sep));
  if (!len) {
    // Header block without a length: drop it and resynchronise.
    buffer_.erase(0, sep + sep_len);
    return next();
  }
  if (buffer_.size() < sep + sep_len + *len) return std::nullopt;
  std::string body = buffer_.substr(sep + sep_len, *len);
  buffer_.erase(0, sep + sep_len + *len);
  return body;
}

std::optional<std::string> read_message(std::istream& in, Framing framing) {
  std::string line;
  if (framing == Framing::Lines) {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!text::trim(line).empty()) return line;
    }
    return std::nullopt;
  }
  std::string headers;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (headers.empty()) continue;
      break;
    }
    headers += line;
    headers += '\n';
  }
  if (headers.empty()) return std::nullopt;
  auto len = content_length(headers);
  if (!len) return std::string();
  std::string body(*len, '\0');
  in.read(body.data(), static_cast<std::streamsize>(*len));
  if (static_cast<std::size_t>(in.gcount()) != *len) return std::nullopt;
  return body;
}

}  // namespace rocq::framing
