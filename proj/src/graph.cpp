#include "agentlab/graph.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace agentlab {

std::string shape_str(const std::vector<int>& shp) {
    std::string s = "[";
    for (size_t i = 0; i < shp.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shp[i]);
    }
    return s + "]";
}

int ParamStore::add(const std::string& name, Tensor init) {
    if (find(name) >= 0) throw std::runtime_error("ParamStore: duplicate parameter '" + name + "'");
    Entry e;
    e.name = name;
    e.grad = Tensor::zeros(init.shape);
    e.m = Tensor::zeros(init.shape);
    e.v = Tensor::zeros(init.shape);
    e.value = std::move(init);
    ps.push_back(std::move(e));
    return static_cast<int>(ps.size()) - 1;
}

int ParamStore::find(const std::string& name) const {
    for (size_t i = 0; i < ps.size(); ++i)
        if (ps[i].name == name) return static_cast<int>(i);
    return -1;
}

void ParamStore::zero_grads() {
    for (auto& e : ps)
        for (auto& g : e.grad.data) g = 0.0;
}

Node& Graph::fresh(Op op, std::vector<int> shape) {
    if (used_ == static_cast<int>(nodes_.size())) nodes_.emplace_back();
    Node& n = nodes_[used_++];
    n.op = op;
    n.npar = 0;
    n.i0 = n.i1 = n.i2 = n.i3 = 0;
    n.d0 = n.d1 = 0.0;
    n.store_idx = -1;
    n.grad_live = false;
    n.on_grad_path = false;
    int ne = Tensor::numel_of(shape);
    n.value.shape = std::move(shape);
    n.value.data.resize(ne);
    return n;
}

void Graph::ensure_grad(int id) {
    Node& n = nodes_[id];
    if (!n.grad_live) {
        n.grad.shape = n.value.shape;
        n.grad.data.assign(n.value.data.size(), 0.0);
        n.grad_live = true;
    }
}

int Graph::constant(const Tensor& t) {
    Node& n = fresh(Op::Const, t.shape);
    n.value.data = t.data;
    return used_ - 1;
}

int Graph::input(const Tensor& t) {
    Node& n = fresh(Op::Input, t.shape);
    n.value.data = t.data;
    n.on_grad_path = true;
    return used_ - 1;
}

int Graph::param(int store_idx) {
    if (!store_) throw std::runtime_error("Graph::param: no ParamStore attached");
    const Tensor& v = store_->ps[store_idx].value;
    Node& n = fresh(Op::Param, v.shape);
    n.value.data = v.data;
    n.store_idx = store_idx;
    n.on_grad_path = true;
    return used_ - 1;
}

static void link(Node& n, const Node* all, std::initializer_list<int> parents) {
    for (int p : parents) {
        n.par[n.npar++] = p;
        if (all[p].on_grad_path) n.on_grad_path = true;
    }
}

// NOTE for every builder below: fresh() may grow the node vector and
// invalidate references into it, so parent value pointers are taken only
// after the fresh()/link() pair.
int Graph::affine(int x, int W, int b) {
    {
        const Tensor& wv = nodes_[W].value;
        const Tensor& xv = nodes_[x].value;
        if (wv.shape.size() != 2 || wv.shape[1] != xv.numel())
            throw std::runtime_error("affine: weight " + shape_str(wv.shape) +
                                     " does not match input " + shape_str(xv.shape));
        if (nodes_[b].value.numel() != wv.shape[0])
            throw std::runtime_error("affine: bias " + shape_str(nodes_[b].value.shape) +
                                     " does not match output dim " + std::to_string(wv.shape[0]));
    }
    const int out = nodes_[W].value.shape[0];
    Node& n = fresh(Op::Affine, {out});
    link(n, nodes_.data(), {x, W, b});
    const Tensor& wv = nodes_[W].value;
    const Tensor& xv = nodes_[x].value;
    const int in = xv.numel();
    const double* wp = wv.data.data();
    const double* xp = xv.data.data();
    const double* bp = nodes_[b].value.data.data();
    double* yp = n.value.data.data();
    for (int o = 0; o < out; ++o) {
        double acc = bp[o];
        const double* row = wp + static_cast<size_t>(o) * in;
        for (int i = 0; i < in; ++i) acc += row[i] * xp[i];
        yp[o] = acc;
    }
    return used_ - 1;
}

int Graph::affine2(int x, int W, int h, int U, int b) {
    {
        const Tensor& wv = nodes_[W].value;
        const Tensor& uv = nodes_[U].value;
        const Tensor& xv = nodes_[x].value;
        const Tensor& hv = nodes_[h].value;
        if (wv.shape[1] != xv.numel() || uv.shape[1] != hv.numel() || wv.shape[0] != uv.shape[0])
            throw std::runtime_error("affine2: shape mismatch W" + shape_str(wv.shape) + " x" +
                                     shape_str(xv.shape) + " U" + shape_str(uv.shape) + " h" +
                                     shape_str(hv.shape));
    }
    const int out = nodes_[W].value.shape[0];
    Node& n = fresh(Op::Affine2, {out});
    link(n, nodes_.data(), {x, W, h, U, b});
    const Tensor& wv = nodes_[W].value;
    const Tensor& uv = nodes_[U].value;
    const Tensor& xv = nodes_[x].value;
    const Tensor& hv = nodes_[h].value;
    const int in1 = xv.numel(), in2 = hv.numel();
    const double* xp = xv.data.data();
    const double* hp = hv.data.data();
    const double* bp = nodes_[b].value.data.data();
    double* yp = n.value.data.data();
    for (int o = 0; o < out; ++o) {
        double acc = bp[o];
        const double* wrow = wv.data.data() + static_cast<size_t>(o) * in1;
        for (int i = 0; i < in1; ++i) acc += wrow[i] * xp[i];
        const double* urow = uv.data.data() + static_cast<size_t>(o) * in2;
        for (int i = 0; i < in2; ++i) acc += urow[i] * hp[i];
        yp[o] = acc;
    }
    return used_ - 1;
}

int Graph::add(int a, int b) {
    if (!nodes_[a].value.same_shape(nodes_[b].value))
        throw std::runtime_error("add: shape mismatch " + shape_str(nodes_[a].value.shape) +
                                 " vs " + shape_str(nodes_[b].value.shape));
    Node& n = fresh(Op::Add, nodes_[a].value.shape);
    link(n, nodes_.data(), {a, b});
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    for (int i = 0; i < av.numel(); ++i) n.value.data[i] = av.data[i] + bv.data[i];
    return used_ - 1;
}

int Graph::mul(int a, int b) {
    if (!nodes_[a].value.same_shape(nodes_[b].value))
        throw std::runtime_error("mul: shape mismatch " + shape_str(nodes_[a].value.shape) +
                                 " vs " + shape_str(nodes_[b].value.shape));
    Node& n = fresh(Op::Mul, nodes_[a].value.shape);
    link(n, nodes_.data(), {a, b});
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    for (int i = 0; i < av.numel(); ++i) n.value.data[i] = av.data[i] * bv.data[i];
    return used_ - 1;
}

int Graph::scale_shift(int x, double s, double c) {
    Node& n = fresh(Op::ScaleShift, nodes_[x].value.shape);
    link(n, nodes_.data(), {x});
    n.d0 = s;
    n.d1 = c;
    const Tensor& xv = nodes_[x].value;
    for (int i = 0; i < xv.numel(); ++i) n.value.data[i] = s * xv.data[i] + c;
    return used_ - 1;
}

int Graph::sigmoid(int x) {
    Node& n = fresh(Op::Sigmoid, nodes_[x].value.shape);
    link(n, nodes_.data(), {x});
    const Tensor& xv = nodes_[x].value;
    for (int i = 0; i < xv.numel(); ++i) n.value.data[i] = 1.0 / (1.0 + std::exp(-xv.data[i]));
    return used_ - 1;
}

int Graph::tanh_(int x) {
    Node& n = fresh(Op::Tanh, nodes_[x].value.shape);
    link(n, nodes_.data(), {x});
    const Tensor& xv = nodes_[x].value;
    for (int i = 0; i < xv.numel(); ++i) n.value.data[i] = std::tanh(xv.data[i]);
    return used_ - 1;
}

int Graph::relu(int x) {
    Node& n = fresh(Op::Relu, nodes_[x].value.shape);
    link(n, nodes_.data(), {x});
    const Tensor& xv = nodes_[x].value;
    for (int i = 0; i < xv.numel(); ++i) n.value.data[i] = xv.data[i] > 0.0 ? xv.data[i] : 0.0;
    return used_ - 1;
}

int Graph::softmax(int x) {
    Node& n = fresh(Op::Softmax, nodes_[x].value.shape);
    link(n, nodes_.data(), {x});
    const Tensor& xv = nodes_[x].value;
    double mx = xv.data[0];
    for (int i = 1; i < xv.numel(); ++i) mx = std::max(mx, xv.data[i]);
    double z = 0.0;
    for (int i = 0; i < xv.numel(); ++i) {
        n.value.data[i] = std::exp(xv.data[i] - mx);
        z += n.value.data[i];
    }
    for (int i = 0; i < xv.numel(); ++i) n.value.data[i] /= z;
    return used_ - 1;
}

int Graph::concat(const std::vector<int>& parts) {
    if (parts.empty() || parts.size() > 5)
        throw std::runtime_error("concat: need 1..5 parts, got " + std::to_string(parts.size()));
    int total = 0;
    for (int p : parts) total += nodes_[p].value.numel();
    Node& n = fresh(Op::Concat, {total});
    for (int p : parts) {
        n.par[n.npar++] = p;
        if (nodes_[p].on_grad_path) n.on_grad_path = true;
    }
    int off = 0;
    for (int p : parts) {
        const Tensor& pv = nodes_[p].value;
        for (int i = 0; i < pv.numel(); ++i) n.value.data[off + i] = pv.data[i];
        off += pv.numel();
    }
    return used_ - 1;
}

int Graph::conv2d(int x, int K, int b, int Cin, int H, int W, int Cout) {
    if (nodes_[x].value.numel() != Cin * H * W)
        throw std::runtime_error("conv2d: input numel " + std::to_string(nodes_[x].value.numel()) +
                                 " does not match " + std::to_string(Cin) + "x" + std::to_string(H) +
                                 "x" + std::to_string(W));
    if (nodes_[K].value.numel() != Cout * Cin * 9)
        throw std::runtime_error("conv2d: kernel numel mismatch");
    const int Ho = H - 2, Wo = W - 2;
    Node& n = fresh(Op::Conv2d, {Cout, Ho, Wo});
    link(n, nodes_.data(), {x, K, b});
    n.i0 = Cin; n.i1 = H; n.i2 = W; n.i3 = Cout;
    const double* xp = nodes_[x].value.data.data();
    const double* kp = nodes_[K].value.data.data();
    const double* bp = nodes_[b].value.data.data();
    double* yp = n.value.data.data();
    for (int o = 0; o < Cout; ++o) {
        for (int i = 0; i < Ho; ++i) {
            for (int j = 0; j < Wo; ++j) {
                double acc = bp[o];
                for (int c = 0; c < Cin; ++c) {
                    const double* xc = xp + (static_cast<size_t>(c) * H + i) * W + j;
                    const double* kc = kp + (static_cast<size_t>(o) * Cin + c) * 9;
                    acc += kc[0] * xc[0] + kc[1] * xc[1] + kc[2] * xc[2];
                    acc += kc[3] * xc[W] + kc[4] * xc[W + 1] + kc[5] * xc[W + 2];
                    acc += kc[6] * xc[2 * W] + kc[7] * xc[2 * W + 1] + kc[8] * xc[2 * W + 2];
                }
                yp[(static_cast<size_t>(o) * Ho + i) * Wo + j] = acc;
            }
        }
    }
    return used_ - 1;
}

void softmax_inplace(const double* logits, double* out, int n) {
    double mx = logits[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
        out[i] = std::exp(logits[i] - mx);
        z += out[i];
    }
    for (int i = 0; i < n; ++i) out[i] /= z;
}

int Graph::softmax_kl(int logits, const Tensor& target, double weight) {
    if (target.numel() != nodes_[logits].value.numel())
        throw std::runtime_error("softmax_kl: target size " + std::to_string(target.numel()) +
                                 " vs logits " + std::to_string(nodes_[logits].value.numel()));
    double sum = 0.0;
    for (double t : target.data) {
        if (!(t >= 0.0)) throw std::runtime_error("softmax_kl: negative target probability");
        sum += t;
    }
    if (std::fabs(sum - 1.0) > 1e-6)
        throw std::runtime_error("softmax_kl: target distribution sums to " + std::to_string(sum) +
                                 ", not normalized");
    if (!nodes_[logits].value.all_finite()) throw std::runtime_error("softmax_kl: non-finite logits");
    Node& n = fresh(Op::SoftmaxKl, {1});
    link(n, nodes_.data(), {logits});
    n.d0 = weight;
    n.aux.shape = target.shape;
    n.aux.data = target.data;
    const Tensor& lv = nodes_[logits].value;
    std::vector<double> p(lv.numel());
    softmax_inplace(lv.data.data(), p.data(), lv.numel());
    double kl = 0.0;
    for (int i = 0; i < lv.numel(); ++i)
        if (target.data[i] > 0.0) kl += target.data[i] * (std::log(target.data[i]) - std::log(p[i]));
    n.value.data[0] = weight * kl;
    return used_ - 1;
}

int Graph::bce_logit(int x, double label, double weight) {
    if (nodes_[x].value.numel() != 1) throw std::runtime_error("bce_logit: expects scalar input");
    Node& n = fresh(Op::BceLogit, {1});
    link(n, nodes_.data(), {x});
    n.d0 = weight;
    n.d1 = label;
    double a = nodes_[x].value.data[0];
    // log(1 + e^a) - y*a, stable form
    double sp = a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
    n.value.data[0] = weight * (sp - label * a);
    return used_ - 1;
}

int Graph::dropout(int x, double rate, Rng& rng) {
    if (rate <= 0.0) return x;
    if (rate >= 1.0) throw std::runtime_error("dropout: rate must be < 1");
    Node& n = fresh(Op::Dropout, nodes_[x].value.shape);
    link(n, nodes_.data(), {x});
    const Tensor& xv = nodes_[x].value;
    n.aux.shape = xv.shape;
    n.aux.data.resize(xv.data.size());
    double keep = 1.0 - rate;
    for (int i = 0; i < xv.numel(); ++i) {
        double m = rng.uniform01() < keep ? 1.0 / keep : 0.0;
        n.aux.data[i] = m;
        n.value.data[i] = m * xv.data[i];
    }
    return used_ - 1;
}

void Graph::check_finite(int id, const std::string& what) const {
    if (!nodes_[id].value.all_finite())
        throw std::runtime_error("non-finite value in " + what);
}

void Graph::backward(int root) {
    if (nodes_[root].value.numel() != 1)
        throw std::runtime_error("backward: root must be scalar, got " +
                                 shape_str(nodes_[root].value.shape));
    ensure_grad(root);
    nodes_[root].grad.data[0] = 1.0;
    for (int id = root; id >= 0; --id) {
        Node& n = nodes_[id];
        if (!n.grad_live || !n.on_grad_path) continue;
        const double* g = n.grad.data.data();
        auto pgrad = [&](int slot) -> double* {
            int p = n.par[slot];
            if (!nodes_[p].on_grad_path) return nullptr;
            ensure_grad(p);
            return nodes_[p].grad.data.data();
        };
        switch (n.op) {
            case Op::Const:
            case Op::Input:
                break;
            case Op::Param:
                if (store_ && n.store_idx >= 0) {
                    auto& pg = store_->ps[n.store_idx].grad.data;
                    for (size_t i = 0; i < pg.size(); ++i) pg[i] += n.grad.data[i];
                }
                break;
            case Op::Affine: {
                const Node& xN = nodes_[n.par[0]];
                const Node& wN = nodes_[n.par[1]];
                const int out = n.value.numel(), in = xN.value.numel();
                double* gx = pgrad(0);
                double* gw = pgrad(1);
                double* gb = pgrad(2);
                const double* wp = wN.value.data.data();
                const double* xp = xN.value.data.data();
                for (int o = 0; o < out; ++o) {
                    const double go = g[o];
                    if (go == 0.0) continue;
                    if (gb) gb[o] += go;
                    const double* row = wp + static_cast<size_t>(o) * in;
                    if (gx)
                        for (int i = 0; i < in; ++i) gx[i] += go * row[i];
                    if (gw) {
                        double* grow = gw + static_cast<size_t>(o) * in;
                        for (int i = 0; i < in; ++i) grow[i] += go * xp[i];
                    }
                }
                break;
            }
            case Op::Affine2: {
                const Node& xN = nodes_[n.par[0]];
                const Node& wN = nodes_[n.par[1]];
                const Node& hN = nodes_[n.par[2]];
                const Node& uN = nodes_[n.par[3]];
                const int out = n.value.numel();
                const int in1 = xN.value.numel(), in2 = hN.value.numel();
                double* gx = pgrad(0);
                double* gw = pgrad(1);
                double* gh = pgrad(2);
                double* gu = pgrad(3);
                double* gb = pgrad(4);
                for (int o = 0; o < out; ++o) {
                    const double go = g[o];
                    if (go == 0.0) continue;
                    if (gb) gb[o] += go;
                    if (gx) {
                        const double* row = wN.value.data.data() + static_cast<size_t>(o) * in1;
                        for (int i = 0; i < in1; ++i) gx[i] += go * row[i];
                    }
                    if (gw) {
                        double* grow = gw + static_cast<size_t>(o) * in1;
                        const double* xp = xN.value.data.data();
                        for (int i = 0; i < in1; ++i) grow[i] += go * xp[i];
                    }
                    if (gh) {
                        const double* row = uN.value.data.data() + static_cast<size_t>(o) * in2;
                        for (int i = 0; i < in2; ++i) gh[i] += go * row[i];
                    }
                    if (gu) {
                        double* grow = gu + static_cast<size_t>(o) * in2;
                        const double* hp = hN.value.data.data();
                        for (int i = 0; i < in2; ++i) grow[i] += go * hp[i];
                    }
                }
                break;
            }
            case Op::Add: {
                double* ga = pgrad(0);
                double* gb = pgrad(1);
                const int ne = n.value.numel();
                if (ga)
                    for (int i = 0; i < ne; ++i) ga[i] += g[i];
                if (gb)
                    for (int i = 0; i < ne; ++i) gb[i] += g[i];
                break;
            }
            case Op::Mul: {
                double* ga = pgrad(0);
                double* gb = pgrad(1);
                const double* av = nodes_[n.par[0]].value.data.data();
                const double* bv = nodes_[n.par[1]].value.data.data();
                const int ne = n.value.numel();
                if (ga)
                    for (int i = 0; i < ne; ++i) ga[i] += g[i] * bv[i];
                if (gb)
                    for (int i = 0; i < ne; ++i) gb[i] += g[i] * av[i];
                break;
            }
            case Op::ScaleShift: {
                double* gx = pgrad(0);
                if (gx)
                    for (int i = 0; i < n.value.numel(); ++i) gx[i] += n.d0 * g[i];
                break;
            }
            case Op::Sigmoid: {
                double* gx = pgrad(0);
                if (gx) {
                    const double* y = n.value.data.data();
                    for (int i = 0; i < n.value.numel(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
                }
                break;
            }
            case Op::Tanh: {
                double* gx = pgrad(0);
                if (gx) {
                    const double* y = n.value.data.data();
                    for (int i = 0; i < n.value.numel(); ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
                }
                break;
            }
            case Op::Softmax: {
                double* gx = pgrad(0);
                if (gx) {
                    const double* y = n.value.data.data();
                    double dot = 0.0;
                    for (int i = 0; i < n.value.numel(); ++i) dot += g[i] * y[i];
                    for (int i = 0; i < n.value.numel(); ++i) gx[i] += y[i] * (g[i] - dot);
                }
                break;
            }
            case Op::Relu: {
                double* gx = pgrad(0);
                if (gx) {
                    const double* x = nodes_[n.par[0]].value.data.data();
                    for (int i = 0; i < n.value.numel(); ++i)
                        if (x[i] > 0.0) gx[i] += g[i];
                }
                break;
            }
            case Op::Concat: {
                int off = 0;
                for (int s = 0; s < n.npar; ++s) {
                    const int ne = nodes_[n.par[s]].value.numel();
                    double* gp = pgrad(s);
                    if (gp)
                        for (int i = 0; i < ne; ++i) gp[i] += g[off + i];
                    off += ne;
                }
                break;
            }
            case Op::Conv2d: {
                const int Cin = n.i0, H = n.i1, W = n.i2, Cout = n.i3;
                const int Ho = H - 2, Wo = W - 2;
                double* gx = pgrad(0);
                double* gk = pgrad(1);
                double* gb = pgrad(2);
                const double* xp = nodes_[n.par[0]].value.data.data();
                const double* kp = nodes_[n.par[1]].value.data.data();
                for (int o = 0; o < Cout; ++o) {
                    for (int i = 0; i < Ho; ++i) {
                        for (int j = 0; j < Wo; ++j) {
                            const double go = g[(static_cast<size_t>(o) * Ho + i) * Wo + j];
                            if (go == 0.0) continue;
                            if (gb) gb[o] += go;
                            for (int c = 0; c < Cin; ++c) {
                                const size_t xoff = (static_cast<size_t>(c) * H + i) * W + j;
                                const size_t koff = (static_cast<size_t>(o) * Cin + c) * 9;
                                for (int a = 0; a < 3; ++a)
                                    for (int bb = 0; bb < 3; ++bb) {
                                        if (gk) gk[koff + a * 3 + bb] += go * xp[xoff + a * W + bb];
                                        if (gx) gx[xoff + a * W + bb] += go * kp[koff + a * 3 + bb];
                                    }
                            }
                        }
                    }
                }
                break;
            }
            case Op::SoftmaxKl: {
                double* gl = pgrad(0);
                if (gl) {
                    const Tensor& lv = nodes_[n.par[0]].value;
                    std::vector<double> p(lv.numel());
                    softmax_inplace(lv.data.data(), p.data(), lv.numel());
                    const double w = n.d0 * g[0];
                    for (int i = 0; i < lv.numel(); ++i) gl[i] += w * (p[i] - n.aux.data[i]);
                }
                break;
            }
            case Op::BceLogit: {
                double* gx = pgrad(0);
                if (gx) {
                    double a = nodes_[n.par[0]].value.data[0];
                    double s = 1.0 / (1.0 + std::exp(-a));
                    gx[0] += n.d0 * g[0] * (s - n.d1);
                }
                break;
            }
            case Op::Dropout: {
                double* gx = pgrad(0);
                if (gx)
                    for (int i = 0; i < n.value.numel(); ++i) gx[i] += g[i] * n.aux.data[i];
                break;
            }
        }
    }
}

double kl_bc_loss_value(const Tensor& oracle_dist, const Tensor& logits, double weight) {
    double sum = 0.0;
    for (double t : oracle_dist.data) {
        if (!(t >= 0.0)) throw std::runtime_error("kl_bc_loss: negative oracle probability");
        sum += t;
    }
    if (std::fabs(sum - 1.0) > 1e-6)
        throw std::runtime_error("kl_bc_loss: oracle distribution not normalized (sum=" +
                                 std::to_string(sum) + ")");
    if (!logits.all_finite()) throw std::runtime_error("kl_bc_loss: non-finite logits");
    std::vector<double> p(logits.numel());
    softmax_inplace(logits.data.data(), p.data(), logits.numel());
    double kl = 0.0;
    for (int i = 0; i < logits.numel(); ++i)
        if (oracle_dist.data[i] > 0.0)
            kl += oracle_dist.data[i] * (std::log(oracle_dist.data[i]) - std::log(p[i]));
    return weight * kl;
}

double meta_bce(double confidence, int correct) {
    if (correct != 0 && correct != 1) throw std::runtime_error("meta_bce: label must be 0 or 1");
    double c = confidence;
    if (c < 1e-7) c = 1e-7;
    if (c > 1.0 - 1e-7) c = 1.0 - 1e-7;
    return correct ? -std::log(c) : -std::log(1.0 - c);
}

}  // namespace agentlab
