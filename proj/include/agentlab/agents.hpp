#pragma once
#include <optional>
#include <string>
#include <vector>

#include "agentlab/env.hpp"
#include "agentlab/graph.hpp"
#include "agentlab/layers.hpp"

namespace agentlab {

// Architecture zoo. A0: feedforward; A1: recurrent; B1: recurrent plus a
// slot workspace read raw; B2: slot workspace with a bounded broadcast bus
// and a self-model head; HotOnly: self-model without any workspace;
// Bc*: B1 with a bottleneck over the raw slot block (linear / MLP / frozen
// random projection).
enum class Arch { A0, A1, B1, B2, HotOnly, BcLinear, BcMlp, BcRandProj };

std::string arch_name(Arch a);
Arch arch_from_name(const std::string& s);
bool arch_has_workspace(Arch a);
bool arch_has_self_model(Arch a);
bool arch_is_recurrent(Arch a);

// Which head produces the final action logits for self-model agents.
enum class Routing { Workspace, ZSelf };
std::string routing_name(Routing r);
Routing routing_from_name(const std::string& s);

enum class SelfLesion { None, Zero, Noise, Permute };
std::string self_lesion_name(SelfLesion m);

constexpr int kSlots = 4;
constexpr int kSlotDim = 16;
constexpr int kHiddenDim = 64;
constexpr int kZSelfDim = 64;
// self-model input: hidden state + broadcast + draft logits + 2 uncertainty scalars
constexpr int kZInDim = kHiddenDim + kSlotDim + kNumActions + 2;

struct AgentConfig {
    Arch arch = Arch::B2;
    bool strong_lesion = false;   // cue content reaches the agent only via the write path
    Routing routing = Routing::Workspace;
    double dropout = 0.0;          // read-path dropout while training
    double train_slot_noise = 0.0; // per-step slot perturbation while training
};

// Normalized entropy (by ln 7) and top1-top2 probability margin of a softmax.
struct UncertaintyScalars {
    double entropy = 0.0;
    double margin = 0.0;
};
UncertaintyScalars uncertainty_scalars(const Tensor& logits);

// Number of unmasked slots at a capacity scale in [0,1] (high indices masked).
int active_slots(double capacity_scale);

struct EvalOverrides {
    double capacity_scale = 1.0;
    double slot_noise = 0.0;    // per-step random walk on stored slot contents
    double hidden_noise = 0.0;  // per-step random walk on the recurrent state
    double embed_noise = 0.0;   // per-step perturbation of the trunk embedding
    SelfLesion self_lesion = SelfLesion::None;
    const std::vector<double>* lesion_mu = nullptr;  // per-dim stats for SelfLesion::Noise
    const std::vector<double>* lesion_sd = nullptr;
    const std::vector<Tensor>* permute_pool = nullptr;  // donor codes for SelfLesion::Permute
    std::optional<Routing> routing;  // override the action routing at eval time
    Rng* noise_rng = nullptr;        // stream for every override above that samples
    // Perturbation probe: at pulse_step, inject N(0, pulse_sigma) into the
    // agent's probe latent (slots / hidden state / embedding).
    double pulse_sigma = 0.0;
    int pulse_step = -1;
    Rng* pulse_rng = nullptr;
    // Frozen-workspace replay: before each read, replace the slot block with a
    // recorded trajectory (used by the broadcast audit's noisy pass).
    const std::vector<Tensor>* frozen_slots = nullptr;
    const std::vector<std::vector<bool>>* frozen_occupied = nullptr;
};

struct AgentStepOutput {
    int action = 0;
    double confidence = 0.5;
    bool has_confidence = false;
    bool wrote = false;
    int write_slot = -1;

    // tape node ids for loss construction and audits (-1 when absent)
    int final_node = -1;
    int draft_node = -1;
    int conf_logit_node = -1;
    int aux_logit_node = -1;  // stimulus probe head over the raw slot block
    int z_self_node = -1;
    int slots_flat_node = -1;

    // value snapshots for metrics
    Tensor final_logits;
    Tensor draft_logits;
    Tensor h;           // recurrent state (empty for A0)
    Tensor slots_flat;  // raw stored slot contents, kSlots*kSlotDim
    Tensor broadcast;   // bus content seen by the read (B2 family)
    Tensor z_self;
    Tensor write_vec;
    Tensor pci_latent;  // latent the perturbation probe pulses and records
    std::vector<bool> occupied;
};

class Agent {
public:
    Agent(const AgentConfig& cfg, uint64_t init_seed);

    const AgentConfig& config() const { return cfg_; }
    uint64_t init_seed() const { return init_seed_; }
    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }

    // Resets recurrent state and workspace for a fresh episode built on g.
    void begin_episode(Graph& g);

    // One control step appended to the episode tape.
    AgentStepOutput step(const ObsTensor& obs, const EvalOverrides& ov);

    void set_training(bool on) { training_ = on; }
    void set_train_rng(Rng* rng) { train_rng_ = rng; }

    // Readout-only subgraph for the broadcast audit: rebuilds the path from
    // the slot block to the final logits with the slots supplied as
    // differentiable Input leaves (one node id per slot). The hidden state is
    // a constant. Returns the final-logits node id.
    int build_readout(Graph& g, const Tensor& h_val, const std::vector<int>& slot_inputs,
                      const std::vector<bool>& occupied, int n_active, Routing routing) const;

    // Architecture + parameter serialization; bit-exact round trip.
    std::string save_json() const;
    static Agent load_json(const std::string& text);

private:
    struct Workspace {
        std::vector<int> slot_node;   // tape node ids; -1 when unoccupied
        std::vector<bool> occupied;
        void reset() {
            slot_node.assign(kSlots, -1);
            occupied.assign(kSlots, false);
        }
    };

    void build_params(Rng& rng);
    int read_heads(Graph& g, int h_node, int embed, const std::vector<int>& slot_nodes,
                   const std::vector<bool>& occupied, int n_active, int zeros16,
                   Routing routing, const EvalOverrides* ov, AgentStepOutput* out) const;

    AgentConfig cfg_;
    uint64_t init_seed_ = 0;
    ParamStore store_;

    EncoderP enc_;
    GruP gru_;
    LinearP head_l1_, head_l2_;  // A0/A1 action head
    LinearP write_;              // workspace write head
    LinearP read_l1_, read_l2_;  // B1/Bc read head, B2/Hot draft head
    LinearP bneck_l1_, bneck_l2_;
    LinearP self_in_, conf_, zh_l1_, zh_l2_, aux_;

    Graph* g_ = nullptr;
    int h_node_ = -1;
    int zeros16_node_ = -1;
    Workspace ws_;
    int step_idx_ = 0;
    bool training_ = false;
    Rng* train_rng_ = nullptr;
};

}  // namespace agentlab
