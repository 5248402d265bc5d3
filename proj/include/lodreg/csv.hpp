#pragma once

#include <string>
#include <vector>

#include "lodreg/data_model.hpp"

namespace lodreg {

// Column mapping for observed-data CSV files. Censored rows carry
// detect = 0 and may leave the covariate cell empty.
struct CsvSchema {
  std::string response = "y";
  std::string covariate = "z";     // raw-scale value, blank when below limit
  std::string detect = "detect";
  std::vector<std::string> x_columns;
  double limit = 0.0;              // detection limit L on the raw scale
};

ObservationSet load_csv(const std::string& path, const CsvSchema& schema,
                        const Transformation& t = {});

// Minimal CSV support shared by the loaders and report writers: header row,
// comma separators, no quoting.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace lodreg
