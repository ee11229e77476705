#pragma once

#include <string>
#include <vector>

#include "coopfe/coalition.hpp"

namespace coopfe {

// Formats a double with enough digits (%.17g) to round-trip bit-exactly
// through parse; used by every CSV writer so outputs are byte-stable.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Writes header + rows, comma-separated, trailing newline, creating parent
// directories as needed.  Throws DataError on I/O failure.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Minimal reader for the artifact's own outputs: header row required,
// cells split on commas (no quoting — the writers never emit commas in
// cells).  Throws DataError on missing file or ragged rows.
CsvTable read_csv(const std::string& path);

// Set functions serialise as `mask,value` rows; mask 0 must carry value 0.
void write_set_function(const std::string& path,
                        const CharacteristicFunction& f);
CharacteristicFunction read_set_function(const std::string& path);

}  // namespace coopfe
