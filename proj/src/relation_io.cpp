#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "geneft/common.hpp"
#include "geneft/relations.hpp"

namespace geneft {

void write_edge_list(std::ostream& out, const RelationMatrix& matrix) {
  const int n = matrix.n();
  out << n << '\n';
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (matrix(i, j)) out << i << ' ' << j << '\n';
}

void write_dense_csv(std::ostream& out, const RelationMatrix& matrix) {
  const int n = matrix.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) out << ',';
      out << (matrix(i, j) ? '1' : '0');
    }
    out << '\n';
  }
}

namespace {

RelationMatrix make_custom(int n, std::vector<std::uint8_t> entries) {
  RelationSpec spec{CustomRelation{entries}, n};
  validate(spec);
  return RelationMatrix(std::move(spec), std::move(entries));
}

}  // namespace

RelationMatrix read_edge_list(std::istream& in) {
  std::string line;
  int line_no = 0;
  int n = -1;
  std::vector<std::uint8_t> entries;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ls(t);
    if (n < 0) {
      if (!(ls >> n) || n < 1) {
        throw std::invalid_argument("edge list line " + std::to_string(line_no) + ": expected positive node count");
      }
      entries.assign(static_cast<std::size_t>(n) * n, 0);
      continue;
    }
    int i = -1, j = -1;
    std::string rest;
    if (!(ls >> i >> j) || (ls >> rest)) {
      throw std::invalid_argument("edge list line " + std::to_string(line_no) + ": expected `i j`");
    }
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw std::invalid_argument("edge list line " + std::to_string(line_no) + ": node index out of range");
    }
    entries[static_cast<std::size_t>(i) * n + j] = 1;
  }
  if (n < 0) throw std::invalid_argument("edge list: missing node count");
  return make_custom(n, std::move(entries));
}

RelationMatrix read_dense_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::vector<std::vector<std::uint8_t>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::uint8_t> row;
    for (const auto& cell : split_trimmed(line, ',')) {
      if (cell != "0" && cell != "1") {
        throw std::invalid_argument("dense csv line " + std::to_string(line_no) + ": entries must be 0 or 1");
      }
      row.push_back(cell == "1" ? 1 : 0);
    }
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw std::invalid_argument("dense csv: empty matrix");
  std::vector<std::uint8_t> entries;
  entries.reserve(static_cast<std::size_t>(n) * n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != static_cast<std::size_t>(n)) {
      throw std::invalid_argument("dense csv: row " + std::to_string(r + 1) + " has " +
                                  std::to_string(rows[r].size()) + " columns, expected " + std::to_string(n));
    }
    entries.insert(entries.end(), rows[r].begin(), rows[r].end());
  }
  return make_custom(n, std::move(entries));
}

RelationMatrix load_relation_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open relation file: " + path);
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  return csv ? read_dense_csv(in) : read_edge_list(in);
}

}  // namespace geneft
