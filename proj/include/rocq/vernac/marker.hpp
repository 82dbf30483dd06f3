#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace rocq::vernac {

// Compiler output for a probe file mixes everything the file printed. A
// sentence that prints a known line is placed right before the command whose
// output we want, and only what follows that line is kept.
inline constexpr std::string_view kMarkerName = "rocq_tools_output_marker";
inline constexpr std::string_view kMarkerSentence = "Locate rocq_tools_output_marker.";

// Text after the last line mentioning the marker; nullopt without a marker.
std::optional<std::string> harvest_after_marker(std::string_view output);

}  // namespace rocq::vernac
