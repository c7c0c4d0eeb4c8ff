#include <istream>
#include <ostream>
#include <sstream>

#include "rfs/conic.hpp"
#include "rfs/error.hpp"
#include "rfs/util.hpp"

namespace rfs::conic {

namespace {

void write_affine(std::ostream& out, const char* tag, const Affine& e) {
  out << tag << ' ' << e.terms().size() << ' ' << format_double(e.constant()) << '\n';
  for (const auto& [j, c] : e.terms()) out << j << ' ' << format_double(c) << '\n';
}

std::string expect_token(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw DataError(std::string("program dump truncated, expected ") + what);
  return tok;
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw DataError(std::string("program dump: cannot read ") + what);
  return v;
}

Affine read_affine(std::istream& in, const char* tag) {
  if (expect_token(in, tag) != tag) throw DataError(std::string("program dump: expected ") + tag);
  const auto nnz = read_value<std::size_t>(in, "term count");
  Affine e(read_value<double>(in, "constant"));
  for (std::size_t k = 0; k < nnz; ++k) {
    const int j = read_value<int>(in, "variable index");
    e.add(Var{j}, read_value<double>(in, "coefficient"));
  }
  return e;
}

std::string token(const std::string& s) {
  if (s.empty()) return "-";
  std::string out = s;
  for (char& ch : out) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') ch = '_';
  }
  return out;
}

}  // namespace

void dump(const Program& p, std::ostream& out) {
  out << "RFSCONE 1\n";
  out << "VARS " << p.num_vars() << '\n';
  for (std::size_t j = 0; j < p.num_vars(); ++j) out << j << ' ' << token(p.var_names()[j]) << '\n';
  write_affine(out, "OBJ", p.objective());
  out << "BLOCKS " << p.blocks().size() << '\n';
  for (const auto& blk : p.blocks()) {
    out << "BLOCK " << to_string(blk.kind) << ' ' << blk.rows.size() << ' ' << token(blk.label)
        << '\n';
    for (const auto& r : blk.rows) write_affine(out, "ROW", r);
  }
  out << "END\n";
}

std::string dump(const Program& p) {
  std::ostringstream out;
  dump(p, out);
  return out.str();
}

Program parse_dump(std::istream& in) {
  if (expect_token(in, "header") != "RFSCONE" || read_value<int>(in, "version") != 1) {
    throw DataError("not an RFSCONE 1 program dump");
  }
  if (expect_token(in, "VARS") != "VARS") throw DataError("program dump: expected VARS");
  Program p;
  const auto n = read_value<std::size_t>(in, "variable count");
  for (std::size_t j = 0; j < n; ++j) {
    read_value<std::size_t>(in, "variable index");
    p.add_var(expect_token(in, "variable name"));
  }
  p.minimize(read_affine(in, "OBJ"));
  if (expect_token(in, "BLOCKS") != "BLOCKS") throw DataError("program dump: expected BLOCKS");
  const auto nb = read_value<std::size_t>(in, "block count");
  for (std::size_t b = 0; b < nb; ++b) {
    if (expect_token(in, "BLOCK") != "BLOCK") throw DataError("program dump: expected BLOCK");
    const std::string kind = expect_token(in, "cone kind");
    const auto rows = read_value<std::size_t>(in, "row count");
    std::string label = expect_token(in, "label");
    if (label == "-") label.clear();
    std::vector<Affine> r;
    for (std::size_t k = 0; k < rows; ++k) r.push_back(read_affine(in, "ROW"));
    if (kind == "ZERO" && rows == 1) {
      p.add_equality(std::move(r[0]), label);
    } else if (kind == "NONNEG" && rows == 1) {
      p.add_nonneg(std::move(r[0]), label);
    } else if (kind == "SOC" && rows >= 1) {
      Affine t = std::move(r[0]);
      r.erase(r.begin());
      p.add_soc(std::move(t), std::move(r), label);
    } else if (kind == "EXP" && rows == 3) {
      p.add_exp(std::move(r[0]), std::move(r[1]), std::move(r[2]), label);
    } else {
      throw DataError("program dump: bad block " + kind + " with " + std::to_string(rows) + " rows");
    }
  }
  if (expect_token(in, "END") != "END") throw DataError("program dump: expected END");
  p.validate();
  return p;
}

}  // namespace rfs::conic
