#include "agentlab/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace agentlab {

Tensor init_matrix(int out, int in, Rng& rng) {
    Tensor t = Tensor::zeros({out, in});
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& v : t.data) v = rng.uniform(-bound, bound);
    return t;
}

Tensor init_vector(int n) { return Tensor::zeros({n}); }

LinearP LinearP::make(ParamStore& s, const std::string& name, int in, int out, Rng& rng) {
    LinearP p;
    p.W = s.add(name + ".W", init_matrix(out, in, rng));
    p.b = s.add(name + ".b", init_vector(out));
    return p;
}

int forward_linear(Graph& g, const LinearP& p, int x) {
    return g.affine(x, g.param(p.W), g.param(p.b));
}

// Square orthogonal matrix via modified Gram-Schmidt on a gaussian draw;
// keeps recurrent dynamics near-isometric at the start of training.
static Tensor init_orthogonal(int n, Rng& rng) {
    Tensor t = Tensor::zeros({n, n});
    for (auto& v : t.data) v = rng.normal();
    for (int i = 0; i < n; ++i) {
        double* ri = &t.data[static_cast<size_t>(i) * n];
        for (int j = 0; j < i; ++j) {
            const double* rj = &t.data[static_cast<size_t>(j) * n];
            double dot = 0.0;
            for (int k = 0; k < n; ++k) dot += ri[k] * rj[k];
            for (int k = 0; k < n; ++k) ri[k] -= dot * rj[k];
        }
        double nrm = 0.0;
        for (int k = 0; k < n; ++k) nrm += ri[k] * ri[k];
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12) throw std::runtime_error("degenerate orthogonal init draw");
        for (int k = 0; k < n; ++k) ri[k] /= nrm;
    }
    return t;
}

GruP GruP::make(ParamStore& s, const std::string& name, int in, int hidden, Rng& rng) {
    GruP p;
    p.Wz = s.add(name + ".Wz", init_matrix(hidden, in, rng));
    p.Uz = s.add(name + ".Uz", init_orthogonal(hidden, rng));
    // negative update-gate bias: retain state by default so cues survive delays
    Tensor bz = Tensor::zeros({hidden});
    for (auto& v : bz.data) v = -1.0;
    p.bz = s.add(name + ".bz", bz);
    p.Wr = s.add(name + ".Wr", init_matrix(hidden, in, rng));
    p.Ur = s.add(name + ".Ur", init_orthogonal(hidden, rng));
    p.br = s.add(name + ".br", init_vector(hidden));
    p.Wh = s.add(name + ".Wh", init_matrix(hidden, in, rng));
    p.Uh = s.add(name + ".Uh", init_orthogonal(hidden, rng));
    p.bh = s.add(name + ".bh", init_vector(hidden));
    return p;
}

int forward_gru(Graph& g, const GruP& p, int x, int h) {
    int z = g.sigmoid(g.affine2(x, g.param(p.Wz), h, g.param(p.Uz), g.param(p.bz)));
    int r = g.sigmoid(g.affine2(x, g.param(p.Wr), h, g.param(p.Ur), g.param(p.br)));
    int rh = g.mul(r, h);
    int hc = g.tanh_(g.affine2(x, g.param(p.Wh), rh, g.param(p.Uh), g.param(p.bh)));
    int keep = g.mul(g.scale_shift(z, -1.0, 1.0), h);
    return g.add(keep, g.mul(z, hc));
}

EncoderP EncoderP::make(ParamStore& s, const std::string& name, Rng& rng) {
    EncoderP p;
    auto kinit = [&](int cout, int cin) {
        Tensor t = Tensor::zeros({cout, cin, 3, 3});
        // He-uniform: keeps relu activation variance flat across the stack
        double bound = std::sqrt(6.0 / static_cast<double>(cin * 9));
        for (auto& v : t.data) v = rng.uniform(-bound, bound);
        return t;
    };
    p.K1 = s.add(name + ".K1", kinit(p.c1, kGridChannels));
    p.b1 = s.add(name + ".b1", init_vector(p.c1));
    p.K2 = s.add(name + ".K2", kinit(p.c2, p.c1));
    p.b2 = s.add(name + ".b2", init_vector(p.c2));
    p.K3 = s.add(name + ".K3", kinit(p.c3, p.c2));
    p.b3 = s.add(name + ".b3", init_vector(p.c3));
    return p;
}

int forward_encoder(Graph& g, const EncoderP& p, int grid, int task_vec, int cue16) {
    int h1 = g.relu(g.conv2d(grid, g.param(p.K1), g.param(p.b1), kGridChannels, 7, 7, p.c1));
    int h2 = g.relu(g.conv2d(h1, g.param(p.K2), g.param(p.b2), p.c1, 5, 5, p.c2));
    int h3 = g.relu(g.conv2d(h2, g.param(p.K3), g.param(p.b3), p.c2, 3, 3, p.c3));
    return g.concat({h3, task_vec, cue16});  // 144 + 7 + 16 = 167
}

void Adam::step(ParamStore& store) {
    ++t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (auto& e : store.ps) {
        if (e.frozen) continue;
        for (size_t i = 0; i < e.value.data.size(); ++i) {
            double gr = e.grad.data[i];
            if (!std::isfinite(gr))
                throw std::runtime_error("Adam: non-finite gradient in parameter '" + e.name + "'");
            e.m.data[i] = cfg.beta1 * e.m.data[i] + (1.0 - cfg.beta1) * gr;
            e.v.data[i] = cfg.beta2 * e.v.data[i] + (1.0 - cfg.beta2) * gr * gr;
            double mhat = e.m.data[i] / bc1;
            double vhat = e.v.data[i] / bc2;
            double upd = cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
            if (cfg.weight_decay > 0.0) upd += cfg.lr * cfg.weight_decay * e.value.data[i];
            e.value.data[i] -= upd;
            if (!std::isfinite(e.value.data[i]))
                throw std::runtime_error("Adam: parameter '" + e.name + "' became non-finite");
        }
    }
}

}  // namespace agentlab
