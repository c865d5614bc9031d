#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deadeye/serialize.hpp"
#include "deadeye/session.hpp"

namespace deadeye::report {

// Full analysis of a set of session logs, one section per experiment found
// among the recorded logs. The result depends only on the log contents, not
// on the order they are passed in, so the CLI and the service produce the same
// bytes. Analyses that cannot run (too few subjects, no errors, ...) appear as
// {"error": "..."} instead of aborting the report.
io::Json build(std::span<const SessionLog> logs);

// Canonical serialization used by every writer of reports.
std::string dump(const io::Json& report);

// Plain-text tables: accuracy, reaction times, the spatial matrix and the
// tests run on them.
std::string text(const io::Json& report);

// (file name, SVG document) pairs: accuracy bars, reaction-time bars and the
// spatial matrix for each experiment.
std::vector<std::pair<std::string, std::string>> svg_plots(const io::Json& report);

}  // namespace deadeye::report
