#include "rocq/vernac/marker.hpp"

namespace rocq::vernac {

std::optional<std::string> harvest_after_marker(std::string_view output) {
  auto at = output.rfind(kMarkerName);
  if (at == std::string_view::npos) return std::nullopt;
  auto nl = output.find('\n', at);
  if (nl == std::string_view::npos) return std::string();
  return std::string(output.substr(nl + 1));
}

}  // namespace rocq::vernac
