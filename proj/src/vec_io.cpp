#include "diachron/vec_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "diachron/error.hpp"

namespace diachron {

void append_double(std::string& out, double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, ptr);
}

namespace {

double parse_double(std::string_view tok, const std::string& origin, std::size_t lineno) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw data_error(origin + ":" + std::to_string(lineno) + ": bad number '" +
                     std::string(tok) + "'");
  return x;
}

// Splits on single spaces/tabs; returns views into `line`.
std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t j = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > j) out.push_back(line.substr(j, i - j));
  }
  return out;
}

void write_rows(std::ostream& out, const Matrix& m) {
  std::string line;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) line.push_back(' ');
      append_double(line, m(i, j));
    }
    line.push_back('\n');
    out << line;
  }
}

}  // namespace

void write_vectors(std::ostream& out, const std::vector<std::string>& words, const Matrix& values) {
  if (words.size() != values.rows())
    throw usage_error("write_vectors: word count does not match matrix rows");
  out << values.rows() << ' ' << values.cols() << '\n';
  std::string line;
  for (std::size_t i = 0; i < values.rows(); ++i) {
    line = words[i];
    for (double x : values.row(i)) {
      line.push_back(' ');
      append_double(line, x);
    }
    line.push_back('\n');
    out << line;
  }
}

void write_vectors(const std::filesystem::path& path, const std::vector<std::string>& words,
                   const Matrix& values) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path.string());
  write_vectors(out, words, values);
}

WordVectors read_vectors(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw data_error(origin + ": empty vector file");
  const auto head = fields(line);
  if (head.size() != 2) throw data_error(origin + ": expected '<count> <dim>' header");
  const auto count = static_cast<std::size_t>(parse_double(head[0], origin, 1));
  const auto dim = static_cast<std::size_t>(parse_double(head[1], origin, 1));
  WordVectors wv;
  wv.values = Matrix(count, dim);
  wv.words.reserve(count);
  std::size_t lineno = 1;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line))
      throw data_error(origin + ": expected " + std::to_string(count) + " rows, got " +
                       std::to_string(i));
    ++lineno;
    const auto f = fields(line);
    if (f.size() != dim + 1)
      throw data_error(origin + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(dim) + " values, got " +
                       std::to_string(f.empty() ? 0 : f.size() - 1));
    wv.words.emplace_back(f[0]);
    for (std::size_t j = 0; j < dim; ++j) wv.values(i, j) = parse_double(f[j + 1], origin, lineno);
  }
  return wv;
}

WordVectors read_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open vector file: " + path.string());
  return read_vectors(in, path.string());
}

void write_adam_state(std::ostream& out, const AdamState& state) {
  std::string head = "adam " + std::to_string(state.m.rows()) + ' ' +
                     std::to_string(state.m.cols()) + ' ' + std::to_string(state.step_count) + ' ';
  append_double(head, state.beta1);
  head.push_back(' ');
  append_double(head, state.beta2);
  head.push_back(' ');
  append_double(head, state.epsilon);
  out << head << '\n';
  write_rows(out, state.m);
  write_rows(out, state.v);
}

AdamState read_adam_state(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty optimizer checkpoint");
  const auto head = fields(line);
  if (head.size() != 7 || head[0] != "adam") throw data_error("malformed optimizer checkpoint");
  const std::string origin = "optimizer checkpoint";
  const auto rows = static_cast<std::size_t>(parse_double(head[1], origin, 1));
  const auto cols = static_cast<std::size_t>(parse_double(head[2], origin, 1));
  AdamState s(rows, cols);
  s.step_count = static_cast<std::uint64_t>(parse_double(head[3], origin, 1));
  s.beta1 = parse_double(head[4], origin, 1);
  s.beta2 = parse_double(head[5], origin, 1);
  s.epsilon = parse_double(head[6], origin, 1);
  std::size_t lineno = 1;
  for (Matrix* m : {&s.m, &s.v}) {
    for (std::size_t i = 0; i < rows; ++i) {
      if (!std::getline(in, line)) throw data_error("truncated optimizer checkpoint");
      ++lineno;
      const auto f = fields(line);
      if (f.size() != cols) throw data_error("optimizer checkpoint row has wrong width");
      for (std::size_t j = 0; j < cols; ++j) (*m)(i, j) = parse_double(f[j], origin, lineno);
    }
  }
  return s;
}

}  // namespace diachron
