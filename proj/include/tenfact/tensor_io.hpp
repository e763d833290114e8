#pragma once

#include <iosfwd>
#include <string>

#include "tenfact/tensor.hpp"

namespace tenfact {

// Text formats. Tensors: a "TNS3 d1 d2 d3" (or "TNS4 d1 d2 d3 d4") header
// line followed by whitespace-separated decimal values in i-major order,
// written with 17 significant digits so round trips are bit exact.
// CP models: "CPMODEL k d order sym" header, one line of k weights, then for
// each factor matrix (A, B, C and D for order 4) k lines, one column each.

void write_tensor(std::ostream& os, const Tensor3& T);
void write_tensor(std::ostream& os, const Tensor4& T);
Tensor3 read_tensor3(std::istream& is);
Tensor4 read_tensor4(std::istream& is);

std::string encode_tensor(const Tensor3& T);
std::string encode_tensor(const Tensor4& T);
Tensor3 decode_tensor3(const std::string& text);
Tensor4 decode_tensor4(const std::string& text);

/// Reads the header tag of a tensor stream without consuming it; returns
/// 3 or 4. Throws on anything else.
int peek_tensor_order(std::istream& is);

void write_cp_model(std::ostream& os, const CPModel& model);
CPModel read_cp_model(std::istream& is);

// Convenience file helpers; throw std::runtime_error on I/O failure.
void save_tensor(const std::string& path, const Tensor3& T);
void save_tensor(const std::string& path, const Tensor4& T);
Tensor3 load_tensor3(const std::string& path);
Tensor4 load_tensor4(const std::string& path);
void save_cp_model(const std::string& path, const CPModel& model);
CPModel load_cp_model(const std::string& path);

/// Formats a double with 17 significant digits ("%.17g").
std::string format_value(double v);

}  // namespace tenfact
