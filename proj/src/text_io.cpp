#include "hjbpod/text_io.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "hjbpod/error.hpp"

namespace hjbpod::io {

std::string format(double x) {
  std::array<char, 32> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), r.ptr);
}

TokenReader::TokenReader(std::string text, std::string source)
    : text_(std::move(text)), source_(std::move(source)) {}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TokenReader TokenReader::open(const std::string& path) { return TokenReader(read_file(path), path); }

std::string TokenReader::word() {
  while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  if (pos_ >= text_.size()) throw FormatError(source_ + ": unexpected end of file");
  const std::size_t start = pos_;
  while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  return text_.substr(start, pos_ - start);
}

double TokenReader::number() {
  const std::string w = word();
  double x = 0.0;
  const auto r = std::from_chars(w.data(), w.data() + w.size(), x);
  if (r.ec != std::errc() || r.ptr != w.data() + w.size()) throw FormatError(source_ + ": bad number '" + w + "'");
  return x;
}

long TokenReader::integer() {
  const std::string w = word();
  long x = 0;
  const auto r = std::from_chars(w.data(), w.data() + w.size(), x);
  if (r.ec != std::errc() || r.ptr != w.data() + w.size()) throw FormatError(source_ + ": bad integer '" + w + "'");
  return x;
}

void TokenReader::expect_header(std::string_view magic) {
  const std::string m = word();
  if (m != magic) throw FormatError(source_ + ": expected " + std::string(magic) + " header, found '" + m + "'");
  const std::string v = word();
  if (v != "v1") throw FormatError(source_ + ": unsupported " + std::string(magic) + " version '" + v + "'");
}

Eigen::VectorXd TokenReader::vector(Eigen::Index n) {
  if (n < 0) throw FormatError(source_ + ": negative length");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = number();
  return v;
}

Eigen::MatrixXd TokenReader::matrix(Eigen::Index rows, Eigen::Index cols) {
  if (rows < 0 || cols < 0) throw FormatError(source_ + ": negative dimension");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number();
  return m;
}

bool TokenReader::at_end() {
  while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  return pos_ >= text_.size();
}

void write_vector(std::ostream& out, const Eigen::VectorXd& v, int per_line) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out << format(v[i]) << ((i + 1) % per_line == 0 || i + 1 == v.size() ? '\n' : ' ');
  }
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << format(m(r, c)) << (c + 1 == m.cols() ? '\n' : ' ');
  }
}

void write_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path + ": " + ec.message());
}

}  // namespace hjbpod::io
