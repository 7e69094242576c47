#pragma once
#include <array>
#include <string>
#include <vector>

#include "agentlab/rng.hpp"
#include "agentlab/tensor.hpp"

namespace agentlab {

// Named parameter storage shared by the optimizer, the tape and checkpoints.
struct ParamStore {
    struct Entry {
        std::string name;
        Tensor value;
        Tensor grad;
        Tensor m, v;  // Adam moments
        bool frozen = false;  // excluded from optimizer updates
    };
    std::vector<Entry> ps;

    int add(const std::string& name, Tensor init);
    int find(const std::string& name) const;  // -1 if absent
    void zero_grads();
    int count() const { return static_cast<int>(ps.size()); }
};

enum class Op : uint8_t {
    Const,    // leaf, no gradient
    Input,    // leaf with gradient (used by audits that differentiate wrt activations)
    Param,    // leaf tied to a ParamStore entry
    Affine,   // y = W x + b            parents: x, W, b
    Affine2,  // y = W x + U h + b      parents: x, W, h, U, b
    Add,      // elementwise
    Mul,      // elementwise
    ScaleShift,  // y = d0 * x + d1
    Sigmoid,
    Tanh,
    Relu,
    Softmax,  // y = softmax(x) over the flat vector
    Concat,   // up to 5 parents, flattened in order
    Conv2d,   // parents: x[C,H,W], K[O,C,3,3], b[O]; valid, stride 1
    SoftmaxKl,   // scalar: d0 * KL(target || softmax(logits)); target in aux
    BceLogit,    // scalar: d0 * BCE(sigmoid(x[0]), label=d1)
    Dropout,  // mask in aux, already scaled by 1/(1-rate)
};

struct Node {
    Op op = Op::Const;
    std::array<int, 5> par{};
    int npar = 0;
    int i0 = 0, i1 = 0, i2 = 0, i3 = 0;
    double d0 = 0.0, d1 = 0.0;
    Tensor value;
    Tensor aux;   // dropout mask / KL target
    Tensor grad;
    bool grad_live = false;   // grad buffer holds meaningful data this sweep
    bool on_grad_path = false;  // reaches a Param or Input leaf
    int store_idx = -1;
};

// Append-only tape. Nodes are created in topological order by construction,
// so backward() is a single reverse sweep. reset() keeps node capacity and
// the tensor buffers alive to avoid reallocating every episode.
class Graph {
public:
    explicit Graph(ParamStore* store = nullptr) : store_(store) {}

    void reset() { used_ = 0; }
    int size() const { return used_; }
    ParamStore* store() const { return store_; }

    int constant(const Tensor& t);
    int constant(std::vector<double> vals) { return constant(Tensor::from(std::move(vals))); }
    int input(const Tensor& t);
    int param(int store_idx);

    int affine(int x, int W, int b);
    int affine2(int x, int W, int h, int U, int b);
    int add(int a, int b);
    int mul(int a, int b);
    int scale_shift(int x, double s, double c);
    int sigmoid(int x);
    int tanh_(int x);
    int relu(int x);
    int softmax(int x);
    int concat(const std::vector<int>& parts);
    int conv2d(int x, int K, int b, int Cin, int H, int W, int Cout);
    // weight * KL(target || softmax(logits)); validates the target distribution.
    int softmax_kl(int logits, const Tensor& target, double weight);
    int bce_logit(int x, double label, double weight);
    int dropout(int x, double rate, Rng& rng);

    const Tensor& val(int id) const { return nodes_[id].value; }
    Tensor& val_mut(int id) { return nodes_[id].value; }
    const Tensor& grad(int id) const { return nodes_[id].grad; }
    bool grad_live(int id) const { return nodes_[id].grad_live; }
    const Node& node(int id) const { return nodes_[id]; }

    // Reverse sweep from a scalar root; accumulates into Param grads in the store.
    void backward(int root);

    // Throws if the node value has a NaN/Inf, naming `what`.
    void check_finite(int id, const std::string& what) const;

private:
    Node& fresh(Op op, std::vector<int> shape);
    void ensure_grad(int id);
    ParamStore* store_;
    std::vector<Node> nodes_;
    int used_ = 0;
};

// Standalone loss helpers (pure math versions of the tape ops, used by
// evaluation code and tests).
double kl_bc_loss_value(const Tensor& oracle_dist, const Tensor& logits, double weight);
double meta_bce(double confidence, int correct);  // clamps confidence to [1e-7, 1-1e-7]

void softmax_inplace(const double* logits, double* out, int n);

}  // namespace agentlab
