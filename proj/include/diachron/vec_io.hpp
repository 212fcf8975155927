#pragma once

// Word-vector text format: a `<count> <dim>` header, then one
// `<word> <v1> ... <vd>` line per row. Floats use the shortest decimal form
// that round-trips exactly.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "diachron/adam.hpp"
#include "diachron/matrix.hpp"

namespace diachron {

struct WordVectors {
  std::vector<std::string> words;
  Matrix values;
};

void write_vectors(std::ostream& out, const std::vector<std::string>& words, const Matrix& values);
void write_vectors(const std::filesystem::path& path, const std::vector<std::string>& words,
                   const Matrix& values);
WordVectors read_vectors(std::istream& in, const std::string& origin = "<stream>");
WordVectors read_vectors(const std::filesystem::path& path);

// Optimizer checkpoint: `adam <rows> <cols> <step> <beta1> <beta2> <eps>`
// then the m rows and the v rows in the same float encoding.
void write_adam_state(std::ostream& out, const AdamState& state);
AdamState read_adam_state(std::istream& in);

void append_double(std::string& out, double x);

}  // namespace diachron
