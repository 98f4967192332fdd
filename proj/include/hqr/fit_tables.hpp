// Published fidelity-fit constants: matrices a..h indexed (n = 0..4, m = 1..3),
// vectors i, j, k indexed by n and l indexed by m. Plain-text format:
//
//   matrix <name> <rows> <cols>   followed by rows of numbers or "-"
//   vector <name> <size>          followed by one row
//
// Lines starting with '#' are comments.

#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hqr {

struct FitTable {
  bool is_vector = false;
  int rows = 0, cols = 0;
  std::vector<std::optional<double>> values;  // row-major

  bool operator==(const FitTable&) const = default;
};

class FitTables {
 public:
  static FitTables parse(std::istream& in) {
    FitTables t;
    std::string line;
    auto next_data = [&](std::string& out) {
      while (std::getline(in, out)) {
        const auto p = out.find_first_not_of(" \t\r");
        if (p == std::string::npos || out[p] == '#') continue;
        return true;
      }
      return false;
    };
    while (next_data(line)) {
      std::istringstream hdr(line);
      std::string kind, name;
      FitTable tab;
      hdr >> kind >> name;
      if (kind == "matrix") {
        hdr >> tab.rows >> tab.cols;
      } else if (kind == "vector") {
        tab.is_vector = true;
        tab.rows = 1;
        hdr >> tab.cols;
      } else {
        throw std::runtime_error("fit tables: unexpected line '" + line + "'");
      }
      if (!hdr || tab.rows < 1 || tab.cols < 1 || name.empty())
        throw std::runtime_error("fit tables: bad header '" + line + "'");
      for (int r = 0; r < tab.rows; ++r) {
        if (!next_data(line)) throw std::runtime_error("fit tables: table '" + name + "' truncated");
        std::istringstream row(line);
        std::string tok;
        for (int c = 0; c < tab.cols; ++c) {
          if (!(row >> tok)) throw std::runtime_error("fit tables: short row in '" + name + "'");
          if (tok == "-") {
            tab.values.emplace_back();
            continue;
          }
          double v = 0.0;
          const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
          if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw std::runtime_error("fit tables: bad number '" + tok + "' in '" + name + "'");
          tab.values.emplace_back(v);
        }
        if (row >> tok) throw std::runtime_error("fit tables: long row in '" + name + "'");
      }
      t.tables_[name] = std::move(tab);
    }
    return t;
  }

  static FitTables load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("fit tables: cannot open " + path);
    return parse(in);
  }

  // Shortest round-trip representation of every value.
  std::string serialize() const {
    std::string out = "# hqr fit tables v1\n";
    for (const auto& [name, tab] : tables_) {
      out += (tab.is_vector ? "vector " + name + " " + std::to_string(tab.cols)
                            : "matrix " + name + " " + std::to_string(tab.rows) + " " + std::to_string(tab.cols)) +
             "\n";
      for (int r = 0; r < tab.rows; ++r) {
        for (int c = 0; c < tab.cols; ++c) {
          const auto& v = tab.values[static_cast<std::size_t>(r * tab.cols + c)];
          if (c) out += ' ';
          if (!v) {
            out += '-';
            continue;
          }
          char buf[64];
          const auto res = std::to_chars(buf, buf + sizeof buf, *v);
          out.append(buf, res.ptr);
        }
        out += '\n';
      }
    }
    return out;
  }

  bool has(const std::string& name) const { return tables_.count(name) != 0; }
  const FitTable& table(const std::string& name) const {
    const auto it = tables_.find(name);
    if (it == tables_.end()) throw std::out_of_range("fit tables: no table '" + name + "'");
    return it->second;
  }

  bool present(const std::string& name, int n, int m) const {
    const auto& t = table(name);
    if (t.is_vector || n < 0 || n >= t.rows || m < 1 || m > t.cols) return false;
    return t.values[static_cast<std::size_t>(n * t.cols + m - 1)].has_value();
  }

  // Matrix entry at swap level n (0-based) and growth iterations m (1-based).
  double at(const std::string& name, int n, int m) const {
    const auto& t = table(name);
    if (t.is_vector) throw std::invalid_argument("fit tables: '" + name + "' is a vector");
    if (n < 0 || n >= t.rows || m < 1 || m > t.cols)
      throw std::out_of_range("fit tables: (n, m) outside '" + name + "'");
    const auto& v = t.values[static_cast<std::size_t>(n * t.cols + m - 1)];
    if (!v)
      throw std::out_of_range("fit tables: '" + name + "' has no entry at n = " + std::to_string(n) +
                              ", m = " + std::to_string(m));
    return *v;
  }

  // Vector entry; i, j, k are indexed by n from 0, l by m from 1.
  double vec(const std::string& name, int index) const {
    const auto& t = table(name);
    if (!t.is_vector) throw std::invalid_argument("fit tables: '" + name + "' is a matrix");
    const int i = name == "l" ? index - 1 : index;
    if (i < 0 || i >= t.cols) throw std::out_of_range("fit tables: index outside '" + name + "'");
    const auto& v = t.values[static_cast<std::size_t>(i)];
    if (!v) throw std::out_of_range("fit tables: absent entry in '" + name + "'");
    return *v;
  }

  bool operator==(const FitTables&) const = default;

 private:
  std::map<std::string, FitTable> tables_;
};

#ifdef HQR_DATA_DIR
inline const FitTables& default_fit_tables() {
  static const FitTables t = FitTables::load(std::string(HQR_DATA_DIR) + "/fit_tables.txt");
  return t;
}
#endif

}  // namespace hqr
