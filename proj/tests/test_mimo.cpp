#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "cimdet/constellation.hpp"
#include "cimdet/mimo.hpp"
#include "cimdet/trace.hpp"
#include "support/oracles.hpp"

using namespace cimdet;

namespace {

ComplexMimoInstance random_complex_instance(RngStream stream, int nt, int nr, int order, double snr_db) {
    return rayleigh_instance(stream, nt, nr, QamConstellation::from_order(order), snr_db);
}

}  // namespace

TEST_CASE("constellation: levels, omega, energies") {
    const QamConstellation q16 = QamConstellation::from_order(16);
    CHECK(q16.levels_per_dim() == 4);
    CHECK(q16.omega() == 3);
    CHECK(q16.level(0) == -3.0);
    CHECK(q16.level(3) == 3.0);
    CHECK(q16.dim_energy() == doctest::Approx(5.0));
    CHECK(q16.symbol_energy() == doctest::Approx(10.0));
    CHECK(QamConstellation::from_order(64).omega() == 7);
    CHECK_THROWS_AS(QamConstellation::from_order(8), ConfigError);
}

TEST_CASE("constellation: nearest level clamps and breaks ties upward") {
    const QamConstellation q16 = QamConstellation::from_order(16);
    CHECK(q16.nearest_level(0.0) == 1.0);    // exact midpoint -> +1
    CHECK(q16.nearest_level(-0.2) == -1.0);
    CHECK(q16.nearest_level(2.0) == 3.0);    // midpoint between 1 and 3
    CHECK(q16.nearest_level(97.0) == 3.0);   // clamp
    CHECK(q16.nearest_level(-97.0) == -3.0);
}

TEST_CASE("bit_error_count: identical, adjacent flips, oracle table") {
    const QamConstellation q4 = QamConstellation::from_order(4);
    const std::vector<double> t = {1.0, -1.0, 1.0, 1.0};
    CHECK(bit_error_count(t, t, q4) == 0);

    // flipping one symbol in both I and Q gives one bit per dimension
    std::vector<double> e = t;
    e[0] = -e[0];
    e[2] = -e[2];
    CHECK(bit_error_count(t, e, q4) == 2);

    CHECK_THROWS_AS(bit_error_count(t, std::vector<double>{1.0, -1.0, 1.0, 2.0}, q4), SymbolError);

    // cross-check against the explicit Gray table for 16-QAM
    const QamConstellation q16 = QamConstellation::from_order(16);
    const auto& table = oracles::gray_table(4);
    Rng rng(RngStream{11, 0});
    for (int trial = 0; trial < 200; ++trial) {
        const int ia = static_cast<int>(rng.next_u64() & 3);
        const int ib = static_cast<int>(rng.next_u64() & 3);
        const std::vector<double> a = {q16.level(ia)};
        const std::vector<double> b = {q16.level(ib)};
        const int expect = std::popcount(table[ia] ^ table[ib]);
        CHECK(bit_error_count(a, b, q16) == expect);
    }
}

TEST_CASE("real_expand: scalar block structure") {
    ComplexMimoInstance c;
    c.nt = 1;
    c.nr = 1;
    c.constellation = QamConstellation::from_order(4);
    c.channel = CMatrix(1, 1);
    c.rx = {cplx(0.0, 0.0)};

    c.channel(0, 0) = cplx(1.0, 0.0);
    RealMimoInstance r = real_expand(c);
    CHECK(r.channel(0, 0) == 1.0);
    CHECK(r.channel(0, 1) == 0.0);
    CHECK(r.channel(1, 0) == 0.0);
    CHECK(r.channel(1, 1) == 1.0);

    c.channel(0, 0) = cplx(0.0, 1.0);
    r = real_expand(c);
    CHECK(r.channel(0, 0) == 0.0);
    CHECK(r.channel(0, 1) == -1.0);
    CHECK(r.channel(1, 0) == 1.0);
    CHECK(r.channel(1, 1) == 0.0);
}

TEST_CASE("real_expand: objective equivalence with complex arithmetic and round-trip") {
    Rng rng(RngStream{21, 4});
    const ComplexMimoInstance c = random_complex_instance(RngStream{21, 9}, 4, 4, 16, 12.0);
    const RealMimoInstance r = real_expand(c);

    for (int trial = 0; trial < 100; ++trial) {
        std::vector<cplx> u(c.nt);
        std::vector<double> ur(2 * c.nt);
        for (int j = 0; j < c.nt; ++j) {
            ur[j] = rng.normal(0.0, 2.0);
            ur[j + c.nt] = rng.normal(0.0, 2.0);
            u[j] = cplx(ur[j], ur[j + c.nt]);
        }
        double complex_obj = 0.0;
        for (int i = 0; i < c.nr; ++i) {
            cplx acc = c.rx[i];
            for (int j = 0; j < c.nt; ++j) acc -= c.channel(i, j) * u[j];
            complex_obj += std::norm(acc);
        }
        const double real_obj = ml_objective(r, ur);
        CHECK(real_obj == doctest::Approx(complex_obj).epsilon(1e-10));
    }

    const ComplexMimoInstance back = real_collapse(r);
    for (std::size_t i = 0; i < c.channel.a.size(); ++i) CHECK(back.channel.a[i] == c.channel.a[i]);
    for (std::size_t i = 0; i < c.rx.size(); ++i) CHECK(back.rx[i] == c.rx[i]);
    for (std::size_t i = 0; i < c.tx.size(); ++i) CHECK(back.tx[i] == c.tx[i]);
}

TEST_CASE("real_expand: Gram commutes with the symplectic exchange") {
    const ComplexMimoInstance c = random_complex_instance(RngStream{33, 2}, 3, 4, 16, 15.0);
    const RealMimoInstance r = real_expand(c);
    const Matrix g = gram(r.channel);
    const int n = c.nt;
    // Omega = [[0, -I], [I, 0]]; check G Omega == Omega G entrywise
    auto omega_apply = [&](int i, int j, bool left) {
        // returns (Omega G)(i,j) when left, (G Omega)(i,j) otherwise
        if (left) return (i < n) ? -g(i + n, j) : g(i - n, j);
        return (j < n) ? g(i, j + n) : -g(i, j - n);
    };
    for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j)
            CHECK(std::fabs(omega_apply(i, j, true) - omega_apply(i, j, false)) <= 1e-10);
}

TEST_CASE("ml_objective: zeros and naive-oracle agreement") {
    const ComplexMimoInstance c = random_complex_instance(RngStream{55, 0}, 2, 3, 16, 10.0);
    const RealMimoInstance r = real_expand(c);
    CHECK(ml_objective(r, r.tx) >= 0.0);

    Rng rng(RngStream{55, 1});
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> u(2 * r.nt);
        for (double& v : u) v = rng.normal(0.0, 3.0);
        CHECK(ml_objective(r, u) == doctest::Approx(oracles::naive_objective(r, u)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(ml_objective(r, std::vector<double>{1.0}), DimensionError);

    // noiseless: objective of the truth is exactly the zero residual
    const ComplexMimoInstance nl = random_complex_instance(RngStream{55, 2}, 2, 2, 4,
                                                           std::numeric_limits<double>::infinity());
    const RealMimoInstance nlr = real_expand(nl);
    CHECK(ml_objective(nlr, nlr.tx) == doctest::Approx(0.0));
}

TEST_CASE("rayleigh_instance: determinism, noiseless limit, SNR calibration") {
    const QamConstellation q16 = QamConstellation::from_order(16);
    const RngStream s{77, 3};
    const ComplexMimoInstance a = rayleigh_instance(s, 4, 4, q16, 10.0);
    const ComplexMimoInstance b = rayleigh_instance(s, 4, 4, q16, 10.0);
    for (std::size_t i = 0; i < a.rx.size(); ++i) CHECK(a.rx[i] == b.rx[i]);
    for (std::size_t i = 0; i < a.channel.a.size(); ++i) CHECK(a.channel.a[i] == b.channel.a[i]);

    const ComplexMimoInstance nl =
        rayleigh_instance(s, 2, 2, q16, std::numeric_limits<double>::infinity());
    CHECK(nl.noise_var == 0.0);
    for (int i = 0; i < nl.nr; ++i) {
        cplx acc(0.0, 0.0);
        for (int j = 0; j < nl.nt; ++j) acc += nl.channel(i, j) * nl.tx[j];
        CHECK(acc == nl.rx[i]);
    }

    // empirical SNR at 10 dB within +-0.3 dB over 10^4 instances
    double signal = 0.0, noise = 0.0;
    const RngStream root{770, 0};
    for (int k = 0; k < 10000; ++k) {
        const ComplexMimoInstance inst = rayleigh_instance(root.child(k), 4, 4, q16, 10.0);
        for (int i = 0; i < inst.nr; ++i) {
            cplx clean(0.0, 0.0);
            for (int j = 0; j < inst.nt; ++j) clean += inst.channel(i, j) * inst.tx[j];
            signal += std::norm(clean);
            noise += std::norm(inst.rx[i] - clean);
        }
    }
    const double snr_db = 10.0 * std::log10(signal / noise);
    CHECK(std::fabs(snr_db - 10.0) <= 0.3);

    CHECK_THROWS_AS(rayleigh_instance(s, 4, 2, q16, 10.0), DimensionError);
}

TEST_CASE("ml_oracle: scalar case equals nearest-symbol quantization") {
    Rng rng(RngStream{88, 1});
    for (int trial = 0; trial < 50; ++trial) {
        const ComplexMimoInstance c =
            random_complex_instance(RngStream{88, 100 + static_cast<std::uint64_t>(trial)}, 1, 1, 4, 8.0);
        const RealMimoInstance r = real_expand(c);
        const std::vector<double> best = ml_oracle(r);

        // invert the scalar complex channel and quantize per dimension
        const cplx h = c.channel(0, 0);
        const cplx est = c.rx[0] / h;
        const std::vector<double> quant = {r.constellation.nearest_level(est.real()),
                                           r.constellation.nearest_level(est.imag())};
        CHECK(ml_objective(r, best) <= ml_objective(r, quant) + 1e-12);
        // for 4-QAM the zero-forcing quantization is the exact ML solution
        CHECK(best[0] == quant[0]);
        CHECK(best[1] == quant[1]);
    }
}

TEST_CASE("ml_oracle: recovers truth on noiseless instances") {
    for (int k = 0; k < 20; ++k) {
        const ComplexMimoInstance c = random_complex_instance(
            RngStream{91, static_cast<std::uint64_t>(k)}, 2, 3, 16, std::numeric_limits<double>::infinity());
        const RealMimoInstance r = real_expand(c);
        const std::vector<double> best = ml_oracle(r);
        for (std::size_t i = 0; i < best.size(); ++i) CHECK(best[i] == r.tx[i]);
    }
}

TEST_CASE("ml_oracle: agrees with the independent exhaustive oracle on 2x2 16-QAM") {
    for (int k = 0; k < 100; ++k) {
        const ComplexMimoInstance c =
            random_complex_instance(RngStream{92, static_cast<std::uint64_t>(k)}, 2, 2, 16, 12.0);
        const RealMimoInstance r = real_expand(c);
        const std::vector<double> a = ml_oracle(r);
        const std::vector<double> b = oracles::exhaustive_ml(r);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
}

TEST_CASE("ml_oracle: never beaten by random lattice vectors") {
    const ComplexMimoInstance c = random_complex_instance(RngStream{93, 5}, 2, 2, 16, 10.0);
    const RealMimoInstance r = real_expand(c);
    const double best = ml_objective(r, ml_oracle(r));
    Rng rng(RngStream{93, 6});
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> u(2 * r.nt);
        for (double& v : u)
            v = r.constellation.level(static_cast<int>(rng.next_u64() & (r.constellation.levels_per_dim() - 1)));
        CHECK(best <= ml_objective(r, u) + 1e-12);
    }
}

TEST_CASE("ml_oracle: tractability guard") {
    ComplexMimoInstance c;
    c.nt = 16;
    c.nr = 16;
    c.constellation = QamConstellation::from_order(64);
    c.channel = CMatrix(16, 16);
    c.rx.assign(16, cplx(0.0, 0.0));
    const RealMimoInstance r = real_expand(c);
    CHECK_THROWS_AS(ml_oracle(r), SearchSpaceError);
}

TEST_CASE("trace: round-trips losslessly") {
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "cimdet_trace_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "t.trace").string();

    SUBCASE("empty trace") {
        ChannelTrace t;
        t.nt = 2;
        t.nr = 2;
        t.source = "unit";
        write_trace(path, t);
        const ChannelTrace back = read_trace(path);
        CHECK(back.nt == 2);
        CHECK(back.nr == 2);
        CHECK(back.count() == 0);
        CHECK(back.source == "unit");
    }

    SUBCASE("identity channel bit-exact") {
        ChannelTrace t;
        t.nt = 2;
        t.nr = 2;
        t.source = "unit";
        CMatrix id(2, 2);
        id(0, 0) = cplx(1.0, 0.0);
        id(1, 1) = cplx(1.0, 0.0);
        t.matrices.push_back(id);
        write_trace(path, t);
        const ChannelTrace back = read_trace(path);
        REQUIRE(back.count() == 1);
        for (std::size_t i = 0; i < id.a.size(); ++i) CHECK(back.matrices[0].a[i] == id.a[i]);
    }

    SUBCASE("100 random 16x16 matrices, max abs diff 0") {
        ChannelTrace t;
        t.nt = 16;
        t.nr = 16;
        t.source = "unit";
        Rng rng(RngStream{4096, 0});
        for (int k = 0; k < 100; ++k) {
            CMatrix m(16, 16);
            for (auto& v : m.a) v = cplx(rng.normal(0.0, 1.0), rng.normal(0.0, 1.0));
            t.matrices.push_back(std::move(m));
        }
        write_trace(path, t);
        const ChannelTrace back = read_trace(path);
        REQUIRE(back.count() == 100);
        for (int k = 0; k < 100; ++k)
            for (std::size_t i = 0; i < t.matrices[k].a.size(); ++i)
                CHECK(back.matrices[k].a[i] == t.matrices[k].a[i]);
    }

    std::filesystem::remove_all(dir);
}

TEST_CASE("trace: header/payload dimension mismatch raises on write") {
    ChannelTrace t;
    t.nt = 2;
    t.nr = 2;
    t.matrices.push_back(CMatrix(3, 2));  // wrong shape for the header
    const std::string path =
        (std::filesystem::temp_directory_path() / "cimdet_dim_mismatch.trace").string();
    CHECK_THROWS_AS(write_trace(path, t), TraceError);
    std::filesystem::remove(path);
}

TEST_CASE("trace: malformed inputs raise TraceError") {
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "cimdet_trace_bad";
    std::filesystem::create_directories(dir);

    const std::string bad_header = (dir / "bad_header.trace").string();
    {
        std::ofstream out(bad_header, std::ios::binary);
        out << "this is not json\n";
    }
    CHECK_THROWS_AS(read_trace(bad_header), TraceError);

    const std::string truncated = (dir / "truncated.trace").string();
    {
        std::ofstream out(truncated, std::ios::binary);
        out << "{\"nt\":2,\"nr\":2,\"count\":3,\"source\":\"x\"}\n";
        const double d = 1.0;
        out.write(reinterpret_cast<const char*>(&d), sizeof d);
    }
    CHECK_THROWS_AS(read_trace(truncated), TraceError);

    CHECK_THROWS_AS(read_trace((dir / "missing.trace").string()), TraceError);
    std::filesystem::remove_all(dir);
}
