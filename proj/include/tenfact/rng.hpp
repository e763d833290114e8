#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace tenfact {

/// Counter-based pseudo-random generator. Every draw is a pure function of
/// (key, counter), so streams can be split with derive() and replayed
/// bit-exactly on any platform. No global state anywhere in the library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc908ULL)) {}

    std::uint64_t next_u64() {
        return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller; pairs are consumed in order.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    Eigen::VectorXd gaussian_vector(int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = gaussian();
        return v;
    }

    /// Uniform direction on the unit sphere S^{n-1}.
    Eigen::VectorXd unit_vector(int n) {
        Eigen::VectorXd v = gaussian_vector(n);
        double norm = v.norm();
        while (norm < 1e-300) {  // astronomically unlikely, but stay total
            v = gaussian_vector(n);
            norm = v.norm();
        }
        return v / norm;
    }

    /// Independent substream; deterministic in (this rng's seed, stream).
    Rng derive(std::uint64_t stream) const {
        Rng r(0);
        r.key_ = mix(key_ ^ mix(stream + 0x9e3779b97f4a7c15ULL));
        return r;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace tenfact
