#pragma once
#include "agentlab/graph.hpp"
#include "agentlab/rng.hpp"

namespace agentlab {

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) init.
Tensor init_matrix(int out, int in, Rng& rng);
Tensor init_vector(int n);  // zeros

struct LinearP {
    int W = -1, b = -1;
    static LinearP make(ParamStore& s, const std::string& name, int in, int out, Rng& rng);
};
int forward_linear(Graph& g, const LinearP& p, int x);

// Cho-style GRU: z = sig(Wz x + Uz h + bz), r = sig(Wr x + Ur h + br),
// hc = tanh(Wh x + Uh (r*h) + bh), h' = (1-z)*h + z*hc
struct GruP {
    int Wz = -1, Uz = -1, bz = -1;
    int Wr = -1, Ur = -1, br = -1;
    int Wh = -1, Uh = -1, bh = -1;
    static GruP make(ParamStore& s, const std::string& name, int in, int hidden, Rng& rng);
};
int forward_gru(Graph& g, const GruP& p, int x, int h);

// Three valid 3x3 conv stages with ReLU: 7x7xC -> 5x5xc1 -> 3x3xc2 -> 1x1x144,
// flattened and concatenated with the 7-dim task vector into a 151-dim embedding.
struct EncoderP {
    int K1 = -1, b1 = -1, K2 = -1, b2 = -1, K3 = -1, b3 = -1;
    int c1 = 8, c2 = 16, c3 = 144;
    static EncoderP make(ParamStore& s, const std::string& name, Rng& rng);
};
int forward_encoder(Graph& g, const EncoderP& p, int grid, int task_vec, int cue16);

constexpr int kGridChannels = 3;
constexpr int kGridSize = 7;
constexpr int kTaskVecDim = 7;
constexpr int kEmbedDim = 167;  // 144 conv features + 7 task dims + 16 cue dims
constexpr int kNumActions = 7;

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled
};

// One update over every parameter in the store; validates gradient finiteness
// and reports the offending parameter by name.
struct Adam {
    AdamConfig cfg;
    long t = 0;
    void step(ParamStore& store);
};

}  // namespace agentlab
