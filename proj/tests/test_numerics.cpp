#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <vector>

#include "agentlab/graph.hpp"
#include "agentlab/layers.hpp"
#include "agentlab/rng.hpp"

using namespace agentlab;

namespace {

// ---- independent oracles ----------------------------------------------

// naive y = W x + b with explicit loops
std::vector<double> matvec_oracle(const std::vector<double>& W, const std::vector<double>& x,
                                  const std::vector<double>& b, int out, int in) {
    std::vector<double> y(out, 0.0);
    for (int o = 0; o < out; ++o) {
        y[o] = b[o];
        for (int i = 0; i < in; ++i) y[o] += W[o * in + i] * x[i];
    }
    return y;
}

// scalar-loop GRU reference (Cho formulation)
std::vector<double> gru_oracle(const std::vector<double>& x, const std::vector<double>& h,
                               const Tensor& Wz, const Tensor& Uz, const Tensor& bz,
                               const Tensor& Wr, const Tensor& Ur, const Tensor& br,
                               const Tensor& Wh, const Tensor& Uh, const Tensor& bh) {
    int n = bz.numel(), m = static_cast<int>(x.size());
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double az = bz.data[i];
        for (int j = 0; j < m; ++j) az += Wz.data[i * m + j] * x[j];
        for (int k = 0; k < n; ++k) az += Uz.data[i * n + k] * h[k];
        double z = sig(az);
        double ah = bh.data[i];
        for (int j = 0; j < m; ++j) ah += Wh.data[i * m + j] * x[j];
        for (int k = 0; k < n; ++k) {
            // r is computed per output row; the gate multiplies h elementwise,
            // so we need r_k, not r_i -- recompute r_k here.
            double ark = br.data[k];
            for (int j = 0; j < m; ++j) ark += Wr.data[k * m + j] * x[j];
            for (int kk = 0; kk < n; ++kk) ark += Ur.data[k * n + kk] * h[kk];
            ah += Uh.data[i * n + k] * (sig(ark) * h[k]);
        }
        double hc = std::tanh(ah);
        out[i] = (1.0 - z) * h[i] + z * hc;
    }
    return out;
}

// sliding-window valid conv, written independently of the engine kernel
std::vector<double> conv_oracle(const std::vector<double>& x, const std::vector<double>& K,
                                const std::vector<double>& b, int Cin, int H, int W, int Cout) {
    int Ho = H - 2, Wo = W - 2;
    std::vector<double> y(Cout * Ho * Wo, 0.0);
    for (int o = 0; o < Cout; ++o)
        for (int i = 0; i < Ho; ++i)
            for (int j = 0; j < Wo; ++j) {
                double acc = b[o];
                for (int c = 0; c < Cin; ++c)
                    for (int a = 0; a < 3; ++a)
                        for (int bb = 0; bb < 3; ++bb)
                            acc += K[((o * Cin + c) * 3 + a) * 3 + bb] * x[(c * H + i + a) * W + j + bb];
                y[(o * Ho + i) * Wo + j] = acc;
            }
    return y;
}

// generic central-difference gradient check on ParamStore entries.
// rel error uses |a-n| / max(1, |a|, |n|).
void gradcheck(ParamStore& store, const std::function<double()>& eval,
               const std::function<void()>& run_backward, Rng& rng, int coords_per_param = 4) {
    store.zero_grads();
    run_backward();
    const double h = 1e-5;
    for (auto& e : store.ps) {
        int ne = e.value.numel();
        for (int c = 0; c < coords_per_param; ++c) {
            int idx = ne == 1 ? 0 : rng.uniform_int(0, ne - 1);
            double keep = e.value.data[idx];
            e.value.data[idx] = keep + h;
            double fp = eval();
            e.value.data[idx] = keep - h;
            double fm = eval();
            e.value.data[idx] = keep;
            double num = (fp - fm) / (2 * h);
            double ana = e.grad.data[idx];
            double rel = std::fabs(ana - num) / std::max({1.0, std::fabs(ana), std::fabs(num)});
            CAPTURE(e.name);
            CAPTURE(idx);
            CHECK(rel < 1e-4);
        }
    }
}

}  // namespace

TEST_CASE("linear layer matches the row-vector example") {
    // y = xW + b with W=[[1,2],[3,4]], x=[1,1], b=[0.5,-0.5] -> [4.5, 5.5].
    // Storage here is [out][in], i.e. the transpose of the row-vector layout.
    ParamStore s;
    int W = s.add("W", Tensor::from({1, 3, 2, 4}, {2, 2}));
    int b = s.add("b", Tensor::from({0.5, -0.5}));
    Graph g(&s);
    int x = g.constant({1, 1});
    int y = g.affine(x, g.param(W), g.param(b));
    CHECK(g.val(y).data[0] == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(g.val(y).data[1] == doctest::Approx(5.5).epsilon(1e-12));
}

TEST_CASE("linear forward equals triple-loop oracle on random cases") {
    Rng rng(11);
    for (int cs = 0; cs < 100; ++cs) {
        int in = rng.uniform_int(1, 9), out = rng.uniform_int(1, 7);
        ParamStore s;
        Tensor W = Tensor::zeros({out, in});
        for (auto& v : W.data) v = rng.normal();
        Tensor b = Tensor::zeros({out});
        for (auto& v : b.data) v = rng.normal();
        std::vector<double> x(in);
        for (auto& v : x) v = rng.normal();
        int Wi = s.add("W", W), bi = s.add("b", b);
        Graph g(&s);
        int y = g.affine(g.constant(x), g.param(Wi), g.param(bi));
        auto want = matvec_oracle(W.data, x, b.data, out, in);
        for (int i = 0; i < out; ++i) CHECK(g.val(y).data[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("linear shape mismatch raises with both shapes in the message") {
    ParamStore s;
    int W = s.add("W", Tensor::zeros({2, 3}));
    int b = s.add("b", Tensor::zeros({2}));
    Graph g(&s);
    int x = g.constant({1, 1});  // length 2, needs 3
    CHECK_THROWS_WITH_AS(g.affine(x, g.param(W), g.param(b)),
                         doctest::Contains("[2,3]"), std::runtime_error);
}

TEST_CASE("gru step matches scalar reference") {
    Rng rng(22);
    for (int cs = 0; cs < 50; ++cs) {
        int in = rng.uniform_int(1, 6), hid = rng.uniform_int(1, 6);
        ParamStore s;
        Rng init(100 + cs);
        GruP p = GruP::make(s, "gru", in, hid, init);
        // randomize biases too so gates are not symmetric
        for (auto& e : s.ps)
            for (auto& v : e.value.data) v += 0.3 * rng.normal();
        std::vector<double> x(in), h(hid);
        for (auto& v : x) v = rng.normal();
        for (auto& v : h) v = rng.normal();
        Graph g(&s);
        int hn = forward_gru(g, p, g.constant(x), g.constant(h));
        auto want = gru_oracle(x, h, s.ps[p.Wz].value, s.ps[p.Uz].value, s.ps[p.bz].value,
                               s.ps[p.Wr].value, s.ps[p.Ur].value, s.ps[p.br].value,
                               s.ps[p.Wh].value, s.ps[p.Uh].value, s.ps[p.bh].value);
        for (int i = 0; i < hid; ++i) CHECK(g.val(hn).data[i] == doctest::Approx(want[i]).epsilon(1e-10));
    }
}

TEST_CASE("gru saturates to the candidate when gates are forced open") {
    ParamStore s;
    Rng init(5);
    GruP p = GruP::make(s, "gru", 3, 4, init);
    // huge update/reset biases -> z ~= 1, r ~= 1 -> h' ~= tanh(Wh x + Uh h + bh)
    for (auto& v : s.ps[p.bz].value.data) v = 50.0;
    for (auto& v : s.ps[p.br].value.data) v = 50.0;
    std::vector<double> x = {0.3, -0.7, 1.1}, h = {0.2, -0.1, 0.05, 0.4};
    Graph g(&s);
    int hn = forward_gru(g, p, g.constant(x), g.constant(h));
    for (int i = 0; i < 4; ++i) {
        double ah = s.ps[p.bh].value.data[i];
        for (int j = 0; j < 3; ++j) ah += s.ps[p.Wh].value.data[i * 3 + j] * x[j];
        for (int k = 0; k < 4; ++k) ah += s.ps[p.Uh].value.data[i * 4 + k] * h[k];
        CHECK(g.val(hn).data[i] == doctest::Approx(std::tanh(ah)).epsilon(1e-8));
    }
}

TEST_CASE("conv2d matches sliding-window oracle and the encoder stacks to 167 dims") {
    Rng rng(33);
    for (int cs = 0; cs < 60; ++cs) {
        int Cin = rng.uniform_int(1, 3), Cout = rng.uniform_int(1, 4);
        int H = rng.uniform_int(3, 7), W = rng.uniform_int(3, 7);
        ParamStore s;
        Tensor K = Tensor::zeros({Cout, Cin, 3, 3});
        for (auto& v : K.data) v = rng.normal();
        Tensor b = Tensor::zeros({Cout});
        for (auto& v : b.data) v = rng.normal();
        std::vector<double> x(Cin * H * W);
        for (auto& v : x) v = rng.normal();
        int Ki = s.add("K", K), bi = s.add("b", b);
        Graph g(&s);
        int y = g.conv2d(g.constant(x), g.param(Ki), g.param(bi), Cin, H, W, Cout);
        auto want = conv_oracle(x, K.data, b.data, Cin, H, W, Cout);
        REQUIRE(g.val(y).numel() == static_cast<int>(want.size()));
        for (size_t i = 0; i < want.size(); ++i)
            CHECK(g.val(y).data[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }

    ParamStore s;
    Rng init(7);
    EncoderP enc = EncoderP::make(s, "enc", init);
    Graph g(&s);
    std::vector<double> grid(3 * 7 * 7, 0.25), task(7, 0.5), cue(16, 0.75);
    int e = forward_encoder(g, enc, g.constant(grid), g.constant(task), g.constant(cue));
    CHECK(g.val(e).numel() == kEmbedDim);
    // tail is the task vector then the cue vector, passed through untouched
    for (int i = 0; i < 7; ++i) CHECK(g.val(e).data[144 + i] == doctest::Approx(0.5));
    for (int i = 0; i < 16; ++i) CHECK(g.val(e).data[151 + i] == doctest::Approx(0.75));
}

TEST_CASE("softmax node: closed forms, shift invariance, overflow safety") {
    ParamStore s;
    Graph g(&s);
    int u = g.softmax(g.constant(std::vector<double>{0, 0, 0}));
    for (int i = 0; i < 3; ++i) CHECK(g.val(u).data[i] == doctest::Approx(1.0 / 3).epsilon(1e-15));

    std::vector<double> x{1, 2, 3};
    double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
    int y = g.softmax(g.constant(x));
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        CHECK(g.val(y).data[i] == doctest::Approx(std::exp(x[i]) / z).epsilon(1e-14));
        sum += g.val(y).data[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));

    int ys = g.softmax(g.constant(std::vector<double>{101, 102, 103}));
    for (int i = 0; i < 3; ++i)
        CHECK(g.val(ys).data[i] == doctest::Approx(g.val(y).data[i]).epsilon(1e-12));

    int big = g.softmax(g.constant(std::vector<double>{1000, 1001}));
    CHECK(std::isfinite(g.val(big).data[0]));
    CHECK(g.val(big).data[1] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("kl behavior-cloning loss closed forms") {
    // one-hot target vs uniform logits over 7 actions -> ln 7
    Tensor onehot = Tensor::from({0, 0, 1, 0, 0, 0, 0});
    Tensor logits = Tensor::from({0, 0, 0, 0, 0, 0, 0});
    CHECK(kl_bc_loss_value(onehot, logits, 1.0) == doctest::Approx(std::log(7.0)).epsilon(1e-12));
    CHECK(std::log(7.0) == doctest::Approx(1.9459101090932196));
    // weighting is linear
    CHECK(kl_bc_loss_value(onehot, logits, 3.0) == doctest::Approx(3.0 * std::log(7.0)));
    // matching distributions -> 0
    Tensor t2 = Tensor::from({0.5, 0.5});
    Tensor l2 = Tensor::from({1.7, 1.7});
    CHECK(kl_bc_loss_value(t2, l2, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    // unnormalized oracle distribution is an error
    Tensor bad = Tensor::from({0.5, 0.6});
    CHECK_THROWS_AS(kl_bc_loss_value(bad, l2, 1.0), std::runtime_error);
    // graph op agrees with the standalone value
    ParamStore s;
    int li = s.add("logits", Tensor::from({0.3, -0.2, 0.9, 0, 0, 0, 0}));
    Graph g(&s);
    int loss = g.softmax_kl(g.param(li), onehot, 3.0);
    CHECK(g.val(loss).data[0] ==
          doctest::Approx(kl_bc_loss_value(onehot, s.ps[li].value, 3.0)).epsilon(1e-12));
}

TEST_CASE("meta bce closed forms and clamping") {
    CHECK(meta_bce(0.5, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(meta_bce(0.5, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // confidence 0.54 on an incorrect trial -> -ln(0.46)
    CHECK(meta_bce(0.54, 0) == doctest::Approx(-std::log(0.46)).epsilon(1e-12));
    CHECK(-std::log(0.46) == doctest::Approx(0.7765287894989966));
    // clamped at the boundaries instead of inf
    CHECK(std::isfinite(meta_bce(0.0, 1)));
    CHECK(std::isfinite(meta_bce(1.0, 0)));
    CHECK(meta_bce(0.0, 1) == doctest::Approx(-std::log(1e-7)));
    CHECK_THROWS_AS(meta_bce(0.5, 2), std::runtime_error);
}

TEST_CASE("adam single hand-computed step and moment recursion") {
    ParamStore s;
    int w = s.add("w", Tensor::from({1.0}));
    s.ps[w].grad.data[0] = 1.0;
    Adam adam;
    adam.step(s);
    // m=0.1, v=0.001, mhat=1, vhat=1 -> delta = -lr / (1 + eps)
    double want = 1.0 - 1e-3 / (1.0 + 1e-8);
    CHECK(s.ps[w].value.data[0] == doctest::Approx(want).epsilon(1e-15));
    // second step with gradient 0.5
    s.ps[w].grad.data[0] = 0.5;
    adam.step(s);
    double m = 0.9 * 0.1 + 0.1 * 0.5;
    double v = 0.999 * 0.001 + 0.001 * 0.25;
    double mhat = m / (1 - std::pow(0.9, 2));
    double vhat = v / (1 - std::pow(0.999, 2));
    want -= 1e-3 * mhat / (std::sqrt(vhat) + 1e-8);
    CHECK(s.ps[w].value.data[0] == doctest::Approx(want).epsilon(1e-14));
    // non-finite gradient names the parameter
    s.ps[w].grad.data[0] = std::nan("");
    CHECK_THROWS_WITH_AS(adam.step(s), doctest::Contains("'w'"), std::runtime_error);
}

TEST_CASE("gradcheck: linear, mlp, gru, conv, losses") {
    Rng rng(44);

    SUBCASE("softmax into linear readout") {
        for (int cs = 0; cs < 60; ++cs) {
            int n = rng.uniform_int(2, 9);
            ParamStore s;
            Rng init(900 + cs);
            LinearP l0 = LinearP::make(s, "l0", n, n, init);
            LinearP l1 = LinearP::make(s, "l1", n, 1, init);
            for (auto& e : s.ps)
                for (auto& v : e.value.data) v += 0.3 * rng.normal();
            std::vector<double> x(n);
            for (auto& v : x) v = 2.0 * rng.normal();
            auto build = [&](Graph& g) {
                int p = g.softmax(forward_linear(g, l0, g.constant(x)));
                return forward_linear(g, l1, p);
            };
            Graph g(&s);
            auto eval = [&]() { g.reset(); return g.val(build(g)).data[0]; };
            auto bwd = [&]() { g.reset(); g.backward(build(g)); };
            gradcheck(s, eval, bwd, rng, 3);
        }
    }

    SUBCASE("linear + relu + kl") {
        for (int cs = 0; cs < 100; ++cs) {
            int in = rng.uniform_int(2, 8), mid = rng.uniform_int(2, 6), out = rng.uniform_int(2, 5);
            ParamStore s;
            Rng init(200 + cs);
            LinearP l1 = LinearP::make(s, "l1", in, mid, init);
            LinearP l2 = LinearP::make(s, "l2", mid, out, init);
            for (auto& e : s.ps)
                for (auto& v : e.value.data) v += 0.2 * rng.normal();
            std::vector<double> x(in);
            for (auto& v : x) v = rng.normal();
            Tensor target = Tensor::zeros({out});
            target.data[rng.uniform_int(0, out - 1)] = 1.0;
            auto build = [&](Graph& g) {
                int h = g.relu(forward_linear(g, l1, g.constant(x)));
                return g.softmax_kl(forward_linear(g, l2, h), target, 2.0);
            };
            Graph g(&s);
            auto eval = [&]() { g.reset(); return g.val(build(g)).data[0]; };
            auto bwd = [&]() { g.reset(); g.backward(build(g)); };
            gradcheck(s, eval, bwd, rng, 3);
        }
    }

    SUBCASE("gru + tanh head + bce") {
        for (int cs = 0; cs < 100; ++cs) {
            int in = rng.uniform_int(2, 5), hid = rng.uniform_int(2, 5);
            ParamStore s;
            Rng init(300 + cs);
            GruP p = GruP::make(s, "gru", in, hid, init);
            LinearP head = LinearP::make(s, "head", hid, 1, init);
            for (auto& e : s.ps)
                for (auto& v : e.value.data) v += 0.2 * rng.normal();
            std::vector<double> x(in), h0(hid);
            for (auto& v : x) v = rng.normal();
            for (auto& v : h0) v = rng.normal();
            auto build = [&](Graph& g) {
                int h1 = forward_gru(g, p, g.constant(x), g.constant(h0));
                int h2 = forward_gru(g, p, g.constant(x), h1);  // two steps, shared params
                return g.bce_logit(forward_linear(g, head, g.tanh_(h2)), 1.0, 1.5);
            };
            Graph g(&s);
            auto eval = [&]() { g.reset(); return g.val(build(g)).data[0]; };
            auto bwd = [&]() { g.reset(); g.backward(build(g)); };
            gradcheck(s, eval, bwd, rng, 3);
        }
    }

    SUBCASE("conv stack") {
        for (int cs = 0; cs < 100; ++cs) {
            ParamStore s;
            Rng init(400 + cs);
            int Cin = 2, Cout = 3;
            s.add("K", init_matrix(Cout * Cin * 9, 1, init));
            s.ps[0].value.shape = {Cout, Cin, 3, 3};
            s.add("b", init_vector(Cout));
            LinearP head = LinearP::make(s, "head", Cout * 9, 1, init);
            std::vector<double> x(Cin * 5 * 5);
            for (auto& v : x) v = rng.normal();
            auto build = [&](Graph& g) {
                int c = g.relu(g.conv2d(g.constant(x), g.param(0), g.param(1), Cin, 5, 5, Cout));
                return g.bce_logit(forward_linear(g, head, c), 0.0, 1.0);
            };
            Graph g(&s);
            auto eval = [&]() { g.reset(); return g.val(build(g)).data[0]; };
            auto bwd = [&]() { g.reset(); g.backward(build(g)); };
            gradcheck(s, eval, bwd, rng, 3);
        }
    }

    SUBCASE("mul diamond, scale_shift, concat, sigmoid") {
        for (int cs = 0; cs < 100; ++cs) {
            ParamStore s;
            Rng init(500 + cs);
            LinearP l = LinearP::make(s, "l", 4, 3, init);
            std::vector<double> x(4);
            for (auto& v : x) v = rng.normal();
            Tensor target = Tensor::from({0.2, 0.3, 0.1, 0.4, 0.0, 0.0});
            auto build = [&](Graph& g) {
                int y = forward_linear(g, l, g.constant(x));
                int sq = g.mul(y, y);  // same parent twice
                int sc = g.scale_shift(g.sigmoid(y), 2.0, -0.5);
                int cat = g.concat({sq, sc});
                return g.softmax_kl(cat, target, 1.0);
            };
            Graph g(&s);
            auto eval = [&]() { g.reset(); return g.val(build(g)).data[0]; };
            auto bwd = [&]() { g.reset(); g.backward(build(g)); };
            gradcheck(s, eval, bwd, rng, 4);
        }
    }

    SUBCASE("dropout with frozen mask") {
        for (int cs = 0; cs < 30; ++cs) {
            ParamStore s;
            Rng init(600 + cs);
            LinearP l = LinearP::make(s, "l", 5, 4, init);
            std::vector<double> x(5);
            for (auto& v : x) v = rng.normal();
            Tensor target = Tensor::from({0.25, 0.25, 0.25, 0.25});
            uint64_t mask_seed = 900 + cs;
            auto build = [&](Graph& g) {
                Rng mask_rng(mask_seed);  // identical mask on every rebuild
                int y = forward_linear(g, l, g.constant(x));
                int d = g.dropout(y, 0.3, mask_rng);
                return g.softmax_kl(d, target, 1.0);
            };
            Graph g(&s);
            auto eval = [&]() { g.reset(); return g.val(build(g)).data[0]; };
            auto bwd = [&]() { g.reset(); g.backward(build(g)); };
            gradcheck(s, eval, bwd, rng, 3);
        }
    }
}

TEST_CASE("backward properties: constants get no gradient; linearity of sums") {
    ParamStore s;
    Rng init(9);
    LinearP l = LinearP::make(s, "l", 3, 1, init);
    std::vector<double> x = {0.5, -0.2, 0.8};

    Graph g(&s);
    int c = g.constant(x);
    int y = forward_linear(g, l, c);
    g.backward(y);
    CHECK_FALSE(g.grad_live(c));  // constant leaf untouched

    // grad of (L1 + L2) == grad of L1 + grad of L2
    Tensor t = Tensor::from({1.0});
    auto loss = [&](Graph& gg, double w) {
        int yy = forward_linear(gg, l, gg.constant(x));
        return gg.softmax_kl(yy, t, w);
    };
    ParamStore::Entry& W = s.ps[l.W];

    s.zero_grads();
    Graph g1(&s);
    g1.backward(loss(g1, 1.0));
    std::vector<double> ga = W.grad.data;

    s.zero_grads();
    Graph g2(&s);
    g2.backward(loss(g2, 2.5));
    std::vector<double> gb = W.grad.data;

    s.zero_grads();
    Graph g3(&s);
    int sum = g3.add(loss(g3, 1.0), loss(g3, 2.5));
    g3.backward(sum);
    for (size_t i = 0; i < ga.size(); ++i)
        CHECK(W.grad.data[i] == doctest::Approx(ga[i] + gb[i]).epsilon(1e-12));
}

TEST_CASE("non-finite values raise hard errors") {
    ParamStore s;
    int li = s.add("logits", Tensor::from({1.0, std::numeric_limits<double>::infinity()}));
    Graph g(&s);
    Tensor t = Tensor::from({0.5, 0.5});
    CHECK_THROWS_AS(g.softmax_kl(g.param(li), t, 1.0), std::runtime_error);
    CHECK_THROWS_AS(g.check_finite(g.constant({std::nan("")}), "probe"), std::runtime_error);
}

TEST_CASE("rng determinism and moments") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng r(7);
    double mean = 0, var = 0;
    const int n = 100000;
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = r.normal();
        mean += xs[i];
    }
    mean /= n;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= n;
    CHECK(mean == doctest::Approx(0.0).epsilon(0.02));
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
    // state round-trip
    Rng c(55);
    c.normal();
    std::string st = c.state_string();
    Rng d(0);
    d.set_state(st);
    for (int i = 0; i < 100; ++i) CHECK(c.normal() == d.normal());
}
