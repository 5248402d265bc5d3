#include "lodreg/csv.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lodreg/errors.hpp"

namespace lodreg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, std::size_t row,
                    const std::string& column) {
  char* end = nullptr;
  const std::string t = trim(cell);
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw DataError("row " + std::to_string(row) + ", column '" + column +
                    "': cannot parse '" + cell + "'");
  return v;
}

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw SchemaError("missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  cells.push_back(cur);
  return cells;
}

ObservationSet load_csv(const std::string& path, const CsvSchema& schema,
                        const Transformation& t) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  if (!(schema.limit > 0.0))
    throw SchemaError("detection limit must be positive");
  if (schema.x_columns.empty())
    throw SchemaError("need at least one fully observed covariate column");

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file '" + path + "'");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  const std::size_t iy = find_column(header, schema.response);
  const std::size_t iz = find_column(header, schema.covariate);
  const std::size_t id = find_column(header, schema.detect);
  std::vector<std::size_t> ix;
  ix.reserve(schema.x_columns.size());
  for (const auto& name : schema.x_columns)
    ix.push_back(find_column(header, name));

  const double limit_c = transform_limit(schema.limit, t);

  std::vector<double> ys, vs;
  std::vector<std::vector<double>> xs;
  std::vector<std::uint8_t> deltas;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    ys.push_back(parse_number(cells[iy], row, schema.response));
    std::vector<double> xrow;
    xrow.reserve(ix.size());
    for (std::size_t k = 0; k < ix.size(); ++k)
      xrow.push_back(parse_number(cells[ix[k]], row, schema.x_columns[k]));
    xs.push_back(std::move(xrow));

    const double detect = parse_number(cells[id], row, schema.detect);
    if (detect != 0.0 && detect != 1.0)
      throw DataError("row " + std::to_string(row) +
                      ": detect flag must be 0 or 1");
    if (detect == 1.0) {
      const double z = parse_number(cells[iz], row, schema.covariate);
      if (!(z > 0.0))
        throw DataError("row " + std::to_string(row) +
                        ": covariate must be positive, got " +
                        std::to_string(z));
      if (z < schema.limit)
        throw DataError("row " + std::to_string(row) +
                        ": detected value below the detection limit");
      vs.push_back(t.inverse(z));
      deltas.push_back(1);
    } else {
      // below-limit cell may be empty or carry the limit; the value is
      // replaced by the transformed limit either way
      vs.push_back(limit_c);
      deltas.push_back(0);
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(ys.size());
  const Eigen::Index p = static_cast<Eigen::Index>(schema.x_columns.size());
  Eigen::VectorXd y(n), v(n);
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = ys[static_cast<std::size_t>(i)];
    v[i] = vs[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < p; ++j)
      x(i, j) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return make_observation_set(std::move(y), std::move(x), std::move(v),
                              std::move(deltas), limit_c);
}

}  // namespace lodreg
