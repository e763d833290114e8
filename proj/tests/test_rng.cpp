#include <doctest.h>

#include "tenfact/rng.hpp"

using namespace tenfact;

TEST_CASE("rng is deterministic and stream-splittable") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c(42), d(43);
    bool differs = false;
    for (int i = 0; i < 10; ++i) differs |= c.next_u64() != d.next_u64();
    CHECK(differs);

    // derived streams do not depend on prior draws from the parent
    Rng parent(7);
    Rng s1 = parent.derive(1);
    parent.next_u64();
    Rng s2 = parent.derive(1);
    CHECK(s1.next_u64() == s2.next_u64());
}

TEST_CASE("rng basic distribution sanity") {
    Rng rng(0);
    double sum = 0.0, sum2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double g = rng.gaussian();
        sum += g;
        sum2 += g * g;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sum2 / n - 1.0) < 0.05);

    for (int i = 0; i < 1000; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(rng.uniform_int(7) < 7);
    }

    Eigen::VectorXd v = rng.unit_vector(9);
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
}
