#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gdo/executor.hpp"

namespace gdo {

// File forms of the run artifacts. Key names and field order are stable;
// everything except wall_ms is byte-reproducible across identical runs.

std::string report_to_json(const ExecutionReport& report);
ExecutionReport report_from_json(const std::string& text);

/// One record per line, cells serialized with the jsonl cell mapping.
std::string quarantine_to_jsonl(const std::vector<QuarantineRecord>& records,
                                const Schema& schema);

/// Write via temp file + rename so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace gdo
