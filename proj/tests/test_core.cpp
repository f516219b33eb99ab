#include <doctest.h>

#include <fstream>

#include "core/conv.hpp"
#include "core/fft.hpp"
#include "core/ops.hpp"
#include "core/scan.hpp"
#include "core/serialize.hpp"
#include "helpers.hpp"

using namespace secor::core;
using testutil::fd_check;
using testutil::random_projection;
using testutil::random_tensor;

TEST_CASE("tensor basics") {
    Tensor t({2, 3});
    CHECK(t.numel() == 6);
    CHECK(t.all_finite());
    t[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(t.all_finite());
    CHECK_THROWS_AS(Tensor({-1, 2}), secor::ContractError);
}

TEST_CASE("rng determinism") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    Rng c(43);
    CHECK(a.uniform() != c.uniform());
}

TEST_CASE("elementwise op gradients match finite differences") {
    Var x(random_tensor({2, 3}, 7, 0.2, 0.9), true);

    auto check_unary = [&](const std::function<Var(const Var&)>& op) {
        return fd_check([&] { return random_projection(op(x), 11); }, x);
    };
    CHECK(check_unary([](const Var& v) { return exp_v(v); }) < 1e-6);
    CHECK(check_unary([](const Var& v) { return log_v(v); }) < 1e-6);
    CHECK(check_unary([](const Var& v) { return sqrt_v(v); }) < 1e-6);
    CHECK(check_unary([](const Var& v) { return sigmoid(v); }) < 1e-6);
    CHECK(check_unary([](const Var& v) { return softplus(v); }) < 1e-6);
    CHECK(check_unary([](const Var& v) { return gelu(v); }) < 1e-6);
    CHECK(check_unary([](const Var& v) { return sin_v(v); }) < 1e-6);
    CHECK(check_unary([](const Var& v) { return square(v); }) < 1e-6);
    CHECK(check_unary([](const Var& v) { return mul_c(add_c(v, 0.3), -1.7); }) < 1e-6);

    Var y(random_tensor({2, 3}, 8, 0.2, 0.9), true);
    CHECK(fd_check([&] { return random_projection(mul(x, y), 12); }, y) < 1e-6);
    CHECK(fd_check([&] { return random_projection(div(x, y), 13); }, y) < 1e-6);
    CHECK(fd_check([&] { return random_projection(atan2_v(x, y), 14); }, x) < 1e-6);
    CHECK(fd_check([&] { return random_projection(atan2_v(x, y), 14); }, y) < 1e-6);
}

TEST_CASE("matmul and reductions") {
    Var a(random_tensor({3, 4}, 1), true);
    Var b(random_tensor({4, 2}, 2), true);
    CHECK(fd_check([&] { return random_projection(matmul(a, b), 3); }, a) < 1e-6);
    CHECK(fd_check([&] { return random_projection(matmul(a, b), 3); }, b) < 1e-6);
    CHECK(fd_check([&] { return mean(square(a)); }, a) < 1e-6);
    CHECK(fd_check([&] { return random_projection(add_rowvec(a, narrow0(reshape(b, {8}), 0, 4)), 5); }, b) < 1e-6);
}

TEST_CASE("layer norm over channels") {
    const int C = 4;
    Var x(random_tensor({C, 3, 3}, 21), true);
    Var g(Tensor::full({C}, 1.0), true);
    Var b(Tensor::zeros({C}), true);

    Var out = layer_norm_ch(x, g, b);
    // per-site statistics across channels
    const auto& v = out.value();
    for (int i = 0; i < 9; ++i) {
        double m = 0.0, var = 0.0;
        for (int c = 0; c < C; ++c) m += v[static_cast<std::size_t>(c) * 9 + i];
        m /= C;
        for (int c = 0; c < C; ++c) {
            const double d = v[static_cast<std::size_t>(c) * 9 + i] - m;
            var += d * d;
        }
        var /= C;
        CHECK(std::fabs(m) < 1e-12);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
    }
    CHECK(fd_check([&] { return random_projection(layer_norm_ch(x, g, b), 22); }, x) < 1e-5);
    CHECK(fd_check([&] { return random_projection(layer_norm_ch(x, g, b), 22); }, g) < 1e-6);
    CHECK(fd_check([&] { return random_projection(layer_norm_ch(x, g, b), 22); }, b) < 1e-6);
}

TEST_CASE("channel attention helpers") {
    Var x(random_tensor({3, 4, 4}, 31), true);
    Var gate(random_tensor({1, 4, 4}, 32, 0.1, 0.9), true);
    CHECK(fd_check([&] { return random_projection(channel_mean(x), 33); }, x) < 1e-6);
    CHECK(fd_check([&] { return random_projection(channel_max(x), 34); }, x) < 1e-5);
    CHECK(fd_check([&] { return random_projection(broadcast_mul_ch(x, gate), 35); }, x) < 1e-6);
    CHECK(fd_check([&] { return random_projection(broadcast_mul_ch(x, gate), 35); }, gate) < 1e-6);
    CHECK(fd_check([&] { return random_projection(concat0({x, x}), 36); }, x) < 1e-6);
}

TEST_CASE("conv2d forward against a hand computation") {
    // 1x2x2 input, 1x1x2x2 kernel, valid conv
    Var x(Tensor({1, 2, 2}), false);
    x.value().data = {1, 2, 3, 4};
    Var w(Tensor({1, 1, 2, 2}), false);
    w.value().data = {1, 0, 0, 1};
    Var b(Tensor({1}), false);
    b.value().data = {0.5};
    Var y = conv2d(x, w, b, 1, 0);
    CHECK(y.value()[0] == doctest::Approx(1 + 4 + 0.5));
}

TEST_CASE("conv gradients match finite differences") {
    Var x(random_tensor({2, 5, 5}, 41), true);
    Var w(random_tensor({3, 2, 3, 3}, 42, -0.5, 0.5), true);
    Var b(random_tensor({3}, 43), true);
    auto f = [&] { return random_projection(conv2d(x, w, b, 1, 1), 44); };
    CHECK(fd_check(f, x) < 1e-6);
    CHECK(fd_check(f, w) < 1e-6);
    CHECK(fd_check(f, b) < 1e-6);

    auto fs = [&] { return random_projection(conv2d(x, w, b, 2, 1), 45); };
    CHECK(fd_check(fs, x) < 1e-6);
    CHECK(fd_check(fs, w) < 1e-6);

    Var wt(random_tensor({2, 3, 2, 2}, 46, -0.5, 0.5), true);
    Var bt(random_tensor({3}, 47), true);
    auto ft = [&] { return random_projection(conv_transpose2d(x, wt, bt, 2), 48); };
    CHECK(fd_check(ft, x) < 1e-6);
    CHECK(fd_check(ft, wt) < 1e-6);
    CHECK(fd_check(ft, bt) < 1e-6);

    auto fp = [&] { return random_projection(avg_pool2x2(reflect_pad2(x, 1, 0, 1, 0)), 49); };
    CHECK(fd_check(fp, x) < 1e-6);
    auto fc = [&] { return random_projection(crop2(x, 1, 2, 3, 2), 50); };
    CHECK(fd_check(fc, x) < 1e-6);
}

TEST_CASE("transposed conv doubles spatial size") {
    Var x(random_tensor({2, 3, 5}, 51), false);
    Var w(random_tensor({2, 4, 2, 2}, 52), false);
    Var y = conv_transpose2d(x, w, Var(), 2);
    CHECK(y.shape() == std::vector<int>{4, 6, 10});
}

TEST_CASE("fft matches the direct DFT oracle on 4x4") {
    const int H = 4, W = 4;
    Tensor plane = random_tensor({1, H, W}, 61);
    Var x(plane, false);
    Var spec = fft2(pack_complex(x, constant(Tensor::zeros({1, H, W}))), false);

    std::vector<double> re_ref, im_ref;
    testutil::dft2_reference(plane.data, H, W, re_ref, im_ref);
    for (int i = 0; i < H * W; ++i) {
        CHECK(spec.value()[static_cast<std::size_t>(i)] == doctest::Approx(re_ref[static_cast<std::size_t>(i)]).epsilon(1e-9));
        CHECK(spec.value()[static_cast<std::size_t>(H * W + i)] == doctest::Approx(im_ref[static_cast<std::size_t>(i)]).epsilon(1e-9));
    }

    // Parseval: ||x||^2 == ||FFT(x)||^2 / (H*W)
    double spatial = 0.0, freq = 0.0;
    for (double v : plane.data) spatial += v * v;
    for (double v : spec.value().data) freq += v * v;
    CHECK(spatial == doctest::Approx(freq / (H * W)).epsilon(1e-10));
}

TEST_CASE("fft round trip and non-power-of-two sizes") {
    for (int H : {4, 6}) {
        for (int W : {4, 12, 5}) {
            Tensor plane = random_tensor({2, H, W}, 62 + H * 31 + W);
            Var x(plane, false);
            Var round =
                real_part(fft2(fft2(pack_complex(x, constant(Tensor::zeros({2, H, W}))), false), true));
            for (std::size_t i = 0; i < plane.numel(); ++i)
                CHECK(round.value()[i] == doctest::Approx(plane[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("fft backward is the transform adjoint") {
    Var x(random_tensor({1, 4, 4}, 63), true);
    auto fwd = [&] {
        Var spec = fft2(pack_complex(x, constant(Tensor::zeros({1, 4, 4}))), false);
        return random_projection(spec, 64);
    };
    CHECK(fd_check(fwd, x) < 1e-6);
    auto inv = [&] {
        Var z = pack_complex(x, mul_c(x, 0.5));
        return random_projection(real_part(fft2(z, true)), 65);
    };
    CHECK(fd_check(inv, x) < 1e-6);
}

TEST_CASE("scan orders and fold/unfold inverses") {
    // row order on [[a,b],[c,d]] -> a,b,c,d ; col-rev -> d,b,c,a
    auto row = scan_order(2, 2, ScanDir::Row);
    CHECK(row == std::vector<int>{0, 1, 2, 3});
    auto colrev = scan_order(2, 2, ScanDir::ColRev);
    CHECK(colrev == std::vector<int>{3, 1, 2, 0});

    Var f(random_tensor({3, 4, 5}, 71), true);
    for (int d = 0; d < kNumScanDirs; ++d) {
        const auto order = scan_order(4, 5, static_cast<ScanDir>(d));
        Var round = fold_seq(unfold_seq(f, order), order, 4, 5);
        for (std::size_t i = 0; i < f.numel(); ++i) CHECK(round.value()[i] == f.value()[i]);
    }
    const auto order = scan_order(4, 5, ScanDir::Col);
    CHECK(fd_check([&] { return random_projection(fold_seq(unfold_seq(f, order), order, 4, 5), 72); }, f) < 1e-6);
}

TEST_CASE("selective scan: spec examples") {
    // pure skip: B = 0, D = 1 -> y == x
    const int L = 5, C = 2, N = 3;
    Var x(random_tensor({L, C}, 81), false);
    Var dt(random_tensor({L, C}, 82, 0.1, 1.0), false);
    Var B(Tensor::zeros({L, N}), false);
    Var Cc(random_tensor({L, N}, 83), false);
    Var A(random_tensor({C, N}, 84, -2.0, -0.5), false);
    Var D(Tensor::full({C}, 1.0), false);
    Var y = selective_scan(x, dt, B, Cc, A, D);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.value()[i] == doctest::Approx(x.value()[i]));

    // single step: y_1 = C_1 . (dt_1 B_1 x_1) + D x_1
    Var x1(Tensor({1, 1}), false);
    x1.value()[0] = 0.7;
    Var dt1(Tensor({1, 1}), false);
    dt1.value()[0] = 0.3;
    Var B1(Tensor({1, 2}), false);
    B1.value().data = {0.5, -0.25};
    Var C1(Tensor({1, 2}), false);
    C1.value().data = {1.5, 2.0};
    Var A1(Tensor({1, 2}), false);
    A1.value().data = {-1.0, -0.5};
    Var D1(Tensor({1}), false);
    D1.value()[0] = 0.1;
    Var y1 = selective_scan(x1, dt1, B1, C1, A1, D1);
    const double expected = 1.5 * (0.3 * 0.5 * 0.7) + 2.0 * (0.3 * -0.25 * 0.7) + 0.1 * 0.7;
    CHECK(y1.value()[0] == doctest::Approx(expected).epsilon(1e-12));

    // decaying impulse: dt=1, A=-1, B=C=1, D=0, x=(1,0,0,0) -> e^0, e^-1, e^-2, e^-3
    const int L4 = 4;
    Var x4(Tensor({L4, 1}), false);
    x4.value().data = {1, 0, 0, 0};
    Var dt4(Tensor::full({L4, 1}, 1.0), false);
    Var B4(Tensor::full({L4, 1}, 1.0), false);
    Var C4(Tensor::full({L4, 1}, 1.0), false);
    Var A4(Tensor::full({1, 1}, -1.0), false);
    Var D4(Tensor::zeros({1}), false);
    Var y4 = selective_scan(x4, dt4, B4, C4, A4, D4);
    for (int t = 0; t < L4; ++t)
        CHECK(y4.value()[static_cast<std::size_t>(t)] == doctest::Approx(std::exp(-t)).epsilon(1e-12));
}

TEST_CASE("selective scan matches the recurrence oracle and finite differences") {
    const int L = 16, C = 3, N = 4;
    Var x(random_tensor({L, C}, 91), true);
    Var dt(random_tensor({L, C}, 92, 0.05, 0.8), true);
    Var B(random_tensor({L, N}, 93), true);
    Var Cc(random_tensor({L, N}, 94), true);
    Var A(random_tensor({C, N}, 95, -2.0, -0.2), true);
    Var D(random_tensor({C}, 96), true);

    Var y = selective_scan(x, dt, B, Cc, A, D);
    const auto ref = testutil::scan_reference(x.value().data, dt.value().data, B.value().data,
                                              Cc.value().data, A.value().data, D.value().data, L, C, N);
    for (std::size_t i = 0; i < ref.size(); ++i)
        CHECK(y.value()[i] == doctest::Approx(ref[i]).epsilon(1e-10));

    auto f = [&] { return random_projection(selective_scan(x, dt, B, Cc, A, D), 97); };
    CHECK(fd_check(f, x) < 1e-5);
    CHECK(fd_check(f, dt) < 1e-5);
    CHECK(fd_check(f, B) < 1e-5);
    CHECK(fd_check(f, Cc) < 1e-5);
    CHECK(fd_check(f, A) < 1e-5);
    CHECK(fd_check(f, D) < 1e-5);
}

TEST_CASE("selective scan rejects non-finite parameters") {
    Var x(Tensor::full({2, 1}, 1.0), false);
    Var dt(Tensor::full({2, 1}, 0.5), false);
    Var B(Tensor::full({2, 1}, 1.0), false);
    Var Cc(Tensor::full({2, 1}, 1.0), false);
    Tensor bad_a({1, 1});
    bad_a[0] = std::numeric_limits<double>::quiet_NaN();
    Var A(bad_a, false);
    Var D(Tensor::zeros({1}), false);
    CHECK_THROWS_AS(selective_scan(x, dt, B, Cc, A, D), secor::NumericError);
}

TEST_CASE("selective scan stability bound") {
    const int L = 32, C = 2, N = 3;
    Var x(random_tensor({L, C}, 101), false);
    Var dt(random_tensor({L, C}, 102, 0.1, 1.0), false);
    Var B(random_tensor({L, N}, 103), false);
    Var Cc(random_tensor({L, N}, 104), false);
    Var A(random_tensor({C, N}, 105, -3.0, -0.5), false);
    Var D(random_tensor({C}, 106), false);
    Var y = selective_scan(x, dt, B, Cc, A, D);

    double max_x = 0, max_c = 0, max_db = 0, max_a = 0, max_d = 0;
    for (double v : x.value().data) max_x = std::max(max_x, std::fabs(v));
    for (double v : Cc.value().data) max_c = std::max(max_c, std::fabs(v));
    for (double v : D.value().data) max_d = std::max(max_d, std::fabs(v));
    for (int t = 0; t < L; ++t)
        for (int c = 0; c < C; ++c)
            for (int n = 0; n < N; ++n) {
                const double dtv = dt.value()[static_cast<std::size_t>(t) * C + c];
                max_db = std::max(max_db, std::fabs(dtv * B.value()[static_cast<std::size_t>(t) * N + n]));
                max_a = std::max(max_a, std::exp(dtv * A.value()[static_cast<std::size_t>(c) * N + n]));
            }
    REQUIRE(max_a < 1.0);
    // states are N-dimensional, so the per-step output bound picks up a factor N
    const double bound = N * max_c * max_db * max_x / (1.0 - max_a) + max_d * max_x;
    for (double v : y.value().data) CHECK(std::fabs(v) <= bound + 1e-9);
}

TEST_CASE("clamp01 passes gradient only inside the range") {
    Var x(Tensor({3}), true);
    x.value().data = {-0.5, 0.5, 1.5};
    Var y = sum(clamp01(x));
    y.backward();
    CHECK(x.grad()[0] == 0.0);
    CHECK(x.grad()[1] == 1.0);
    CHECK(x.grad()[2] == 0.0);
}

TEST_CASE("container round trip and tamper detection") {
    testutil::TempDir tmp("container");
    Container c;
    c.kind = "prompts";
    c.meta["note"] = "x";
    c.tensors.emplace_back("a", random_tensor({4, 5}, 111));
    c.tensors.emplace_back("b", random_tensor({7}, 112));
    const std::string path = tmp.sub("c.bin");
    save_container(c, path);

    Container back = load_container(path);
    CHECK(back.kind == "prompts");
    CHECK(back.meta.at("note") == "x");
    REQUIRE(back.tensors.size() == 2);
    CHECK(back.tensors[0].second.data == c.tensors[0].second.data);

    // flip one payload byte -> integrity error
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekg(0, std::ios::end);
        const auto size = static_cast<long>(f.tellg());
        f.seekp(size - 9);
        char byte = 0;
        f.seekg(size - 9);
        f.read(&byte, 1);
        byte ^= 0x10;
        f.seekp(size - 9);
        f.write(&byte, 1);
    }
    CHECK_THROWS_AS(load_container(path), secor::IntegrityError);
}
