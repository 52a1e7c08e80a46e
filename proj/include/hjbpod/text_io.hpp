#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace hjbpod::io {

// Shortest decimal representation that parses back to the same double.
std::string format(double x);

// Whitespace-separated token reader over a whole file. Every accessor throws
// FormatError on exhaustion or a malformed token, naming the file.
class TokenReader {
 public:
  TokenReader(std::string text, std::string source);
  static TokenReader open(const std::string& path);

  std::string word();
  double number();
  long integer();
  // Reads `magic` and version token "v1"; a different version is a FormatError.
  void expect_header(std::string_view magic);
  Eigen::VectorXd vector(Eigen::Index n);
  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols);  // row-major in the file
  bool at_end();
  const std::string& source() const { return source_; }

 private:
  std::string text_;
  std::string source_;
  std::size_t pos_ = 0;
};

void write_vector(std::ostream& out, const Eigen::VectorXd& v, int per_line = 8);
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);  // one row per line

// Whole file contents; IoError if it cannot be opened.
std::string read_file(const std::string& path);

// Atomically replaces `path` with `contents` (write to a temporary, rename).
void write_file(const std::string& path, const std::string& contents);

}  // namespace hjbpod::io
