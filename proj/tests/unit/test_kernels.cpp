#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "peye/seed.hpp"
#include "peye/simd/kernels.hpp"

using namespace peye;
using simd::KernelTable;

namespace {

simd::TriangleSetup random_setup(Rng& rng) {
    simd::TriangleSetup t;
    for (auto& e : t.edge) {
        // small integers make exact zeros (pixel centres on an edge) common
        if (rng.below(2) == 0) {
            e.a = static_cast<double>(static_cast<int>(rng.below(7)) - 3);
            e.b = static_cast<double>(static_cast<int>(rng.below(7)) - 3);
            e.c = static_cast<double>(static_cast<int>(rng.below(41)) - 20) * 0.5;
        } else {
            e.a = rng.uniform(-2, 2);
            e.b = rng.uniform(-2, 2);
            e.c = rng.uniform(-50, 50);
        }
        e.inclusive = rng.below(2) == 0;
    }
    for (auto& k : t.k) k = rng.uniform(-0.01, 0.05);
    t.far = rng.below(4) == 0 ? std::numeric_limits<double>::infinity() : rng.uniform(1, 100);
    t.id = static_cast<std::uint32_t>(1 + rng.below(5));
    t.color = static_cast<std::uint32_t>(rng.below(1u << 24));
    return t;
}

}  // namespace

TEST_CASE("AVX2 kernels are available on this machine or cleanly absent") {
    const auto avx = simd::avx2_kernels();
    if (!avx) {
        MESSAGE("AVX2 unavailable; equivalence tests compare scalar with itself");
    }
    CHECK(!simd::active_kernels().name.empty());
}

TEST_CASE("raster span: scalar and AVX2 write identical buffers") {
    const KernelTable& s = simd::scalar_kernels();
    const KernelTable v = simd::avx2_kernels().value_or(s);
    Rng rng(11);
    for (int trial = 0; trial < 20000; ++trial) {
        const auto tri = random_setup(rng);
        const int len = 1 + static_cast<int>(rng.below(40));
        const int x0 = static_cast<int>(rng.below(30));
        const int y = static_cast<int>(rng.below(30));
        std::vector<double> d1(static_cast<std::size_t>(len));
        std::vector<std::uint32_t> i1(d1.size()), c1(d1.size());
        for (std::size_t k = 0; k < d1.size(); ++k) {
            const auto pick = rng.below(3);
            d1[k] = pick == 0 ? std::numeric_limits<double>::infinity() : pick == 1 ? rng.uniform(1, 60) : 20.0;
            i1[k] = static_cast<std::uint32_t>(rng.below(6));
            c1[k] = static_cast<std::uint32_t>(rng.below(1000));
        }
        auto d2 = d1;
        auto i2 = i1;
        auto c2 = c1;
        s.raster_span(tri, y, x0, x0 + len, d1.data(), i1.data(), c1.data());
        v.raster_span(tri, y, x0, x0 + len, d2.data(), i2.data(), c2.data());
        REQUIRE(std::memcmp(d1.data(), d2.data(), d1.size() * sizeof(double)) == 0);
        REQUIRE(i1 == i2);
        REQUIRE(c1 == c2);
    }
}

TEST_CASE("depth quantisation: scalar and AVX2 agree, with reference values") {
    const KernelTable& s = simd::scalar_kernels();
    const KernelTable v = simd::avx2_kernels().value_or(s);
    std::vector<float> depth{1.234f, 700.0f, std::numeric_limits<float>::infinity(), 0.0f, 655.34f, 655.36f, 0.009f};
    Rng rng(5);
    for (int i = 0; i < 100003; ++i) depth.push_back(static_cast<float>(rng.uniform(0.0, 800.0)));
    std::vector<std::uint16_t> a(depth.size()), b(depth.size());
    s.quantize_depth_cm(depth.data(), a.data(), depth.size());
    v.quantize_depth_cm(depth.data(), b.data(), depth.size());
    CHECK(a == b);
    CHECK(a[0] == 123);
    CHECK(a[1] == 65535);
    CHECK(a[2] == 0);
    CHECK(a[3] == 0);
    CHECK(a[6] == 0);
    for (std::size_t i = 7; i < depth.size(); ++i) {
        const double expect = std::min(65535.0, std::floor(static_cast<double>(depth[i]) * 100.0));
        REQUIRE(std::abs(static_cast<double>(a[i]) - expect) <= 1.0);
    }
}

TEST_CASE("rgb blend: scalar and AVX2 agree and match the formula") {
    const KernelTable& s = simd::scalar_kernels();
    const KernelTable v = simd::avx2_kernels().value_or(s);
    Rng rng(8);
    for (std::size_t n : {std::size_t{1}, std::size_t{7}, std::size_t{8}, std::size_t{33}, std::size_t{4099}}) {
        std::vector<std::uint8_t> src(3 * n);
        std::vector<float> f(n);
        for (auto& c : src) c = static_cast<std::uint8_t>(rng.below(256));
        for (auto& x : f) x = rng.below(5) == 0 ? 0.5f : static_cast<float>(rng.uniform(-0.2, 1.2));
        const float target[3] = {190.0f, 0.0f, 255.0f};
        std::vector<std::uint8_t> a(src.size()), b(src.size());
        s.blend_rgb(src.data(), a.data(), f.data(), n, target);
        v.blend_rgb(src.data(), b.data(), f.data(), n, target);
        REQUIRE(a == b);
        for (std::size_t p = 0; p < n; ++p) {
            for (int c = 0; c < 3; ++c) {
                const float val = static_cast<float>(src[3 * p + c]);
                const float r = std::nearbyint(val + (target[c] - val) * f[p]);
                CHECK(a[3 * p + c] == static_cast<std::uint8_t>(std::clamp(r, 0.0f, 255.0f)));
            }
        }
        // in place
        auto inplace = src;
        v.blend_rgb(inplace.data(), inplace.data(), f.data(), n, target);
        CHECK(inplace == a);
    }
}
