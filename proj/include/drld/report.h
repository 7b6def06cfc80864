#pragma once

#include <string>

#include "drld/modes.h"
#include "drld/search.h"

namespace drld {

// CSV columns: block,seed,mode,nmi,ari,eps,minpts,rounds
std::string report_csv(const RunReport& report);
// CSV columns: round,best_nmi,seed,method (one row per curve sample, all blocks)
std::string curve_csv(const RunReport& report);
std::string report_json(const RunReport& report);
RunReport report_from_json(const std::string& text);

// Per-layer episodes: action sequence, parameters, rewards and stop type.
std::string search_trace_json(const SearchResult& result);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

// Appends the rows of `extra` to `into`.
void merge_reports(RunReport& into, const RunReport& extra);

}  // namespace drld
