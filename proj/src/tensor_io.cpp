#include "tenfact/tensor_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tenfact {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

double read_value(std::istream& is, const char* what) {
    double v;
    if (!(is >> v)) fail(std::string("decode: missing or malformed ") + what);
    if (!std::isfinite(v)) fail(std::string("decode: non-finite ") + what);
    return v;
}

int read_dim(std::istream& is) {
    long long v;
    if (!(is >> v) || v <= 0) fail("decode: malformed dimension");
    return static_cast<int>(v);
}

void expect_end(std::istream& is, const char* what) {
    double extra;
    if (is >> extra) fail(std::string("decode: trailing values after ") + what);
}

void write_values(std::ostream& os, const std::vector<double>& values) {
    // 8 values per line keeps files diffable without bloating small tensors
    for (std::size_t i = 0; i < values.size(); ++i) {
        os << format_value(values[i]);
        os << (((i + 1) % 8 == 0 || i + 1 == values.size()) ? '\n' : ' ');
    }
}

std::vector<double> read_values(std::istream& is, std::size_t count, const char* what) {
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) values[i] = read_value(is, what);
    return values;
}

}  // namespace

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_tensor(std::ostream& os, const Tensor3& T) {
    os << "TNS3 " << T.d1() << ' ' << T.d2() << ' ' << T.d3() << '\n';
    write_values(os, T.values());
}

void write_tensor(std::ostream& os, const Tensor4& T) {
    os << "TNS4 " << T.d1() << ' ' << T.d2() << ' ' << T.d3() << ' ' << T.d4() << '\n';
    write_values(os, T.values());
}

Tensor3 read_tensor3(std::istream& is) {
    std::string tag;
    if (!(is >> tag) || tag != "TNS3") fail("decode: expected TNS3 header");
    int d1 = read_dim(is), d2 = read_dim(is), d3 = read_dim(is);
    auto values = read_values(
        is, static_cast<std::size_t>(d1) * d2 * d3, "tensor value");
    expect_end(is, "tensor values");
    return Tensor3(d1, d2, d3, std::move(values));
}

Tensor4 read_tensor4(std::istream& is) {
    std::string tag;
    if (!(is >> tag) || tag != "TNS4") fail("decode: expected TNS4 header");
    int d1 = read_dim(is), d2 = read_dim(is), d3 = read_dim(is), d4 = read_dim(is);
    auto values = read_values(
        is, static_cast<std::size_t>(d1) * d2 * d3 * d4, "tensor value");
    expect_end(is, "tensor values");
    return Tensor4(d1, d2, d3, d4, std::move(values));
}

int peek_tensor_order(std::istream& is) {
    std::string tag;
    auto pos = is.tellg();
    if (!(is >> tag)) fail("decode: empty tensor stream");
    is.clear();
    is.seekg(pos);
    if (tag == "TNS3") return 3;
    if (tag == "TNS4") return 4;
    fail("decode: unknown tensor header '" + tag + "'");
}

std::string encode_tensor(const Tensor3& T) {
    std::ostringstream os;
    write_tensor(os, T);
    return os.str();
}

std::string encode_tensor(const Tensor4& T) {
    std::ostringstream os;
    write_tensor(os, T);
    return os.str();
}

Tensor3 decode_tensor3(const std::string& text) {
    std::istringstream is(text);
    return read_tensor3(is);
}

Tensor4 decode_tensor4(const std::string& text) {
    std::istringstream is(text);
    return read_tensor4(is);
}

void write_cp_model(std::ostream& os, const CPModel& model) {
    const int k = model.rank();
    const int d = model.dim();
    os << "CPMODEL " << k << ' ' << d << ' ' << model.order() << ' '
       << (model.symmetric ? 1 : 0) << '\n';
    for (int i = 0; i < k; ++i)
        os << format_value(model.weights[i]) << (i + 1 == k ? '\n' : ' ');
    if (k == 0) os << '\n';
    const Matrix* factors[4] = {&model.A, &model.B, &model.C,
                                model.D.has_value() ? &*model.D : nullptr};
    for (int f = 0; f < model.order(); ++f)
        for (int i = 0; i < k; ++i)
            for (int r = 0; r < d; ++r)
                os << format_value((*factors[f])(r, i)) << (r + 1 == d ? '\n' : ' ');
}

CPModel read_cp_model(std::istream& is) {
    std::string tag;
    if (!(is >> tag) || tag != "CPMODEL") fail("decode: expected CPMODEL header");
    long long k, d, order, sym;
    if (!(is >> k >> d >> order >> sym) || k < 0 || d <= 0 ||
        (order != 3 && order != 4) || (sym != 0 && sym != 1))
        fail("decode: malformed CPMODEL header");
    CPModel model;
    model.symmetric = sym == 1;
    model.weights = Vector(k);
    for (long long i = 0; i < k; ++i) model.weights[i] = read_value(is, "weight");
    const int nf = static_cast<int>(order);
    Matrix factors[4];
    for (int f = 0; f < nf; ++f) {
        factors[f] = Matrix(d, k);
        for (long long i = 0; i < k; ++i)
            for (long long r = 0; r < d; ++r)
                factors[f](r, i) = read_value(is, "factor entry");
    }
    expect_end(is, "factor entries");
    model.A = factors[0];
    model.B = factors[1];
    model.C = factors[2];
    if (nf == 4) model.D = factors[3];
    model.validate();
    return model;
}

namespace {

template <typename WriteFn>
void save_text(const std::string& path, WriteFn fn) {
    std::ofstream os(path);
    if (!os) fail("cannot open '" + path + "' for writing");
    fn(os);
    if (!os) fail("write failed for '" + path + "'");
}

std::ifstream open_input(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail("cannot open '" + path + "'");
    return is;
}

}  // namespace

void save_tensor(const std::string& path, const Tensor3& T) {
    save_text(path, [&](std::ostream& os) { write_tensor(os, T); });
}

void save_tensor(const std::string& path, const Tensor4& T) {
    save_text(path, [&](std::ostream& os) { write_tensor(os, T); });
}

Tensor3 load_tensor3(const std::string& path) {
    auto is = open_input(path);
    return read_tensor3(is);
}

Tensor4 load_tensor4(const std::string& path) {
    auto is = open_input(path);
    return read_tensor4(is);
}

void save_cp_model(const std::string& path, const CPModel& model) {
    save_text(path, [&](std::ostream& os) { write_cp_model(os, model); });
}

CPModel load_cp_model(const std::string& path) {
    auto is = open_input(path);
    return read_cp_model(is);
}

}  // namespace tenfact
