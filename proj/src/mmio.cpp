#include "mihs/mmio.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mihs {

namespace {

[[noreturn]] void fail(const std::string& path, long line, const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Reads the next non-comment, non-blank line; returns false at EOF.
bool next_data_line(std::istream& in, std::string& out, long& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t i = line.find_first_not_of(" \t\r");
    if (i == std::string::npos) continue;
    if (line[i] == '%') continue;
    out = line;
    return true;
  }
  return false;
}

} // namespace

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  long line_no = 0;

  std::string header;
  if (!std::getline(in, header)) fail(path, 1, "empty file");
  ++line_no;
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") fail(path, 1, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") fail(path, 1, "unsupported object '" + object + "'");
  if (format != "array" && format != "coordinate")
    fail(path, 1, "unsupported format '" + format + "'");
  if (field != "real" && field != "integer")
    fail(path, 1, "unsupported field '" + field + "' (need real or integer)");
  if (symmetry != "general")
    fail(path, 1, "unsupported symmetry '" + symmetry + "' (need general)");

  std::string line;
  if (!next_data_line(in, line, line_no)) fail(path, line_no, "missing size line");
  std::istringstream sz(line);
  long n = 0, d = 0, nnz = 0;
  if (format == "array") {
    if (!(sz >> n >> d)) fail(path, line_no, "bad array size line");
  } else {
    if (!(sz >> n >> d >> nnz)) fail(path, line_no, "bad coordinate size line");
  }
  std::string extra;
  if (sz >> extra) fail(path, line_no, "trailing tokens on size line");
  if (n < 0 || d < 0 || nnz < 0) fail(path, line_no, "negative dimension");

  Matrix M = Matrix::Zero(n, d);
  if (format == "array") {
    long need = n * d, got = 0;
    long i = 0, j = 0; // column-major fill
    while (got < need) {
      if (!next_data_line(in, line, line_no))
        fail(path, line_no, "expected " + std::to_string(need) + " values, got " +
                                std::to_string(got));
      std::istringstream vs(line);
      double v;
      while (vs >> v) {
        if (got == need) fail(path, line_no, "too many values");
        M(i, j) = v;
        if (++i == n) {
          i = 0;
          ++j;
        }
        ++got;
      }
      if (!vs.eof()) fail(path, line_no, "malformed value");
    }
  } else {
    for (long k = 0; k < nnz; ++k) {
      if (!next_data_line(in, line, line_no))
        fail(path, line_no, "expected " + std::to_string(nnz) + " entries, got " +
                                std::to_string(k));
      std::istringstream es(line);
      long i, j;
      double v;
      if (!(es >> i >> j >> v)) fail(path, line_no, "malformed coordinate entry");
      if (es >> extra) fail(path, line_no, "trailing tokens on coordinate entry");
      if (i < 1 || i > n || j < 1 || j > d)
        fail(path, line_no, "index (" + std::to_string(i) + "," +
                                std::to_string(j) + ") out of bounds");
      M(i - 1, j - 1) += v; // duplicates accumulate
    }
  }
  if (next_data_line(in, line, line_no)) fail(path, line_no, "unexpected trailing data");
  return M;
}

void write_matrix(const std::string& path, const Matrix& M) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "%%MatrixMarket matrix array real general\n";
  out << M.rows() << " " << M.cols() << "\n";
  char buf[64];
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", M(i, j));
      out << buf << "\n";
    }
  if (!out) throw std::runtime_error("write failed for " + path);
}

Vector read_vector(const std::string& path) {
  Matrix M = read_matrix(path);
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.row(0).transpose();
  throw std::runtime_error(path + ": expected a vector, got " +
                           std::to_string(M.rows()) + "x" +
                           std::to_string(M.cols()));
}

void write_vector(const std::string& path, const Vector& v) {
  write_matrix(path, v);
}

} // namespace mihs
