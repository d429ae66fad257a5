#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace termforge {

// Process-wide warning log. Stages record recoverable anomalies here (clamped
// ranks, dropped rows, clipped k ranges); the CLI prints them and the pipeline
// copies them into its manifest.
void warn(std::string message);

// Returns all warnings recorded so far and clears the log.
std::vector<std::string> take_warnings();

// Current log length, and the warnings recorded after such a mark (without
// clearing the log).
std::size_t warning_mark();
std::vector<std::string> warnings_since(std::size_t mark);

// Echo warnings to stderr as they are recorded (off by default).
void set_warning_echo(bool on);

}  // namespace termforge
