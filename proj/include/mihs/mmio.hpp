#pragma once

#include "mihs/types.hpp"

#include <string>

namespace mihs {

// Matrix Market I/O ("array" and "coordinate" formats, real, general).
// Writers emit array format with %.17g entries (bit round-trip); readers sum
// duplicate coordinate entries and report parse errors with 1-based line
// numbers. Vectors are n x 1 matrices on disk.
Matrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const Matrix& M);
Vector read_vector(const std::string& path);
void write_vector(const std::string& path, const Vector& v);

} // namespace mihs
