#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcrb/linalg.hpp"

namespace qcrb::io {

using json = nlohmann::json;

// Complex matrices serialize row-major with [re, im] entry pairs.
json to_json(const Matrix& m);
json to_json(const RealMatrix& m);
json to_json(const RealVector& v);

Matrix complex_matrix_from_json(const json& j);
RealMatrix real_matrix_from_json(const json& j);
RealVector real_vector_from_json(const json& j);

/// Shortest representation that round-trips a double (17 significant digits).
std::string format_double(double x);

/// RFC-4180 field quoting.
std::string csv_escape(const std::string& field);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
  void write(std::ostream& out) const;
  void write_file(const std::string& path) const;
};

/// Hex SHA-1 digest (content hashing for result envelopes).
std::string sha1_hex(const std::string& data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace qcrb::io
