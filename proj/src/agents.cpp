#include "agentlab/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace agentlab {

std::string arch_name(Arch a) {
    switch (a) {
        case Arch::A0: return "A0";
        case Arch::A1: return "A1";
        case Arch::B1: return "B1";
        case Arch::B2: return "B2";
        case Arch::HotOnly: return "HOT_ONLY";
        case Arch::BcLinear: return "BC_LINEAR";
        case Arch::BcMlp: return "BC_MLP";
        case Arch::BcRandProj: return "BC_RANDPROJ";
    }
    return "?";
}

Arch arch_from_name(const std::string& s) {
    for (Arch a : {Arch::A0, Arch::A1, Arch::B1, Arch::B2, Arch::HotOnly, Arch::BcLinear,
                   Arch::BcMlp, Arch::BcRandProj})
        if (arch_name(a) == s) return a;
    throw std::runtime_error("unknown architecture '" + s + "'");
}

bool arch_has_workspace(Arch a) {
    return a == Arch::B1 || a == Arch::B2 || a == Arch::BcLinear || a == Arch::BcMlp ||
           a == Arch::BcRandProj;
}
bool arch_has_self_model(Arch a) { return a == Arch::B2 || a == Arch::HotOnly; }
bool arch_is_recurrent(Arch a) { return a != Arch::A0; }

std::string routing_name(Routing r) { return r == Routing::Workspace ? "workspace" : "z_self"; }
Routing routing_from_name(const std::string& s) {
    if (s == "workspace") return Routing::Workspace;
    if (s == "z_self") return Routing::ZSelf;
    throw std::runtime_error("unknown routing '" + s + "'");
}

std::string self_lesion_name(SelfLesion m) {
    switch (m) {
        case SelfLesion::None: return "none";
        case SelfLesion::Zero: return "zero";
        case SelfLesion::Noise: return "noise";
        case SelfLesion::Permute: return "permute";
    }
    return "?";
}

UncertaintyScalars uncertainty_scalars(const Tensor& logits) {
    const int n = logits.numel();
    std::vector<double> p(n);
    softmax_inplace(logits.data.data(), p.data(), n);
    double ent = 0.0;
    for (double q : p)
        if (q > 0.0) ent -= q * std::log(q);
    ent /= std::log(static_cast<double>(n));
    double top1 = 0.0, top2 = 0.0;
    for (double q : p) {
        if (q > top1) {
            top2 = top1;
            top1 = q;
        } else if (q > top2) {
            top2 = q;
        }
    }
    return {ent, top1 - top2};
}

int active_slots(double capacity_scale) {
    if (capacity_scale < 0.0 || capacity_scale > 1.0)
        throw std::runtime_error("capacity scale must be in [0,1]");
    return static_cast<int>(std::lround(capacity_scale * kSlots));
}

Agent::Agent(const AgentConfig& cfg, uint64_t init_seed) : cfg_(cfg), init_seed_(init_seed) {
    if (cfg.arch == Arch::HotOnly && cfg.strong_lesion)
        throw std::runtime_error(
            "HOT_ONLY has no workspace write path; strong-lesion wiring would sever every cue "
            "route");
    if (cfg.routing == Routing::ZSelf && cfg.arch != Arch::B2)
        throw std::runtime_error("z-self action routing requires the B2 self-model");
    Rng rng(hash_tags(init_seed, {0xa6e17ULL}));
    build_params(rng);
}

void Agent::build_params(Rng& rng) {
    enc_ = EncoderP::make(store_, "enc", rng);
    const int D = kSlots * kSlotDim;
    switch (cfg_.arch) {
        case Arch::A0:
            head_l1_ = LinearP::make(store_, "head.l1", kEmbedDim, kHiddenDim, rng);
            head_l2_ = LinearP::make(store_, "head.l2", kHiddenDim, kNumActions, rng);
            break;
        case Arch::A1:
            gru_ = GruP::make(store_, "gru", kEmbedDim, kHiddenDim, rng);
            head_l1_ = LinearP::make(store_, "head.l1", kHiddenDim, kHiddenDim, rng);
            head_l2_ = LinearP::make(store_, "head.l2", kHiddenDim, kNumActions, rng);
            break;
        case Arch::B1:
        case Arch::BcLinear:
        case Arch::BcMlp:
        case Arch::BcRandProj:
            gru_ = GruP::make(store_, "gru", kEmbedDim, kHiddenDim, rng);
            write_ = LinearP::make(store_, "write", kHiddenDim + kCueDim, kSlotDim, rng);
            if (cfg_.arch != Arch::B1) {
                bneck_l1_ = LinearP::make(store_, "bneck.l1", D, kHiddenDim, rng);
                if (cfg_.arch == Arch::BcMlp)
                    bneck_l2_ = LinearP::make(store_, "bneck.l2", kHiddenDim, kHiddenDim, rng);
                if (cfg_.arch == Arch::BcRandProj) {
                    store_.ps[bneck_l1_.W].frozen = true;
                    store_.ps[bneck_l1_.b].frozen = true;
                }
                // the bottleneck code stands in for the self latent, so the
                // confidence head reads it (trainable even over a frozen projection)
                conf_ = LinearP::make(store_, "conf", kHiddenDim, 1, rng);
            }
            read_l1_ = LinearP::make(store_, "read.l1", kHiddenDim + kHiddenDim, kHiddenDim, rng);
            read_l2_ = LinearP::make(store_, "read.l2", kHiddenDim, kNumActions, rng);
            break;
        case Arch::B2:
            gru_ = GruP::make(store_, "gru", kEmbedDim, kHiddenDim, rng);
            write_ = LinearP::make(store_, "write", kHiddenDim + kCueDim, kSlotDim, rng);
            read_l1_ = LinearP::make(store_, "read.l1", kHiddenDim + D, kHiddenDim, rng);
            read_l2_ = LinearP::make(store_, "read.l2", kHiddenDim, kNumActions, rng);
            self_in_ = LinearP::make(store_, "self.in", kZInDim, kZSelfDim, rng);
            conf_ = LinearP::make(store_, "conf", kZSelfDim, 1, rng);
            zh_l1_ = LinearP::make(store_, "zhead.l1", kZSelfDim, kHiddenDim, rng);
            zh_l2_ = LinearP::make(store_, "zhead.l2", kHiddenDim, kNumActions, rng);
            aux_ = LinearP::make(store_, "aux", D, 1, rng);
            break;
        case Arch::HotOnly:
            gru_ = GruP::make(store_, "gru", kEmbedDim, kHiddenDim, rng);
            read_l1_ = LinearP::make(store_, "read.l1", kHiddenDim, kHiddenDim, rng);
            read_l2_ = LinearP::make(store_, "read.l2", kHiddenDim, kNumActions, rng);
            self_in_ = LinearP::make(store_, "self.in", kZInDim, kZSelfDim, rng);
            conf_ = LinearP::make(store_, "conf", kZSelfDim, 1, rng);
            break;
    }
}

void Agent::begin_episode(Graph& g) {
    g_ = &g;
    step_idx_ = 0;
    ws_.reset();
    zeros16_node_ = g.constant(Tensor::zeros({kSlotDim}));
    h_node_ = arch_is_recurrent(cfg_.arch) ? g.constant(Tensor::zeros({kHiddenDim})) : -1;
}

namespace {
int noise_const(Graph& g, int n, double sigma, Rng& rng) {
    Tensor t = Tensor::zeros({n});
    for (auto& v : t.data) v = sigma * rng.normal();
    return g.constant(t);
}
}  // namespace

// Shared read path. `slot_nodes`/`occupied` describe the workspace after this
// step's write; `ov` may be null (audit graphs run without overrides).
int Agent::read_heads(Graph& g, int h_node, int embed, const std::vector<int>& slot_nodes,
                      const std::vector<bool>& occupied, int n_active, int zeros16,
                      Routing routing, const EvalOverrides* ov, AgentStepOutput* out) const {
    auto mlp2 = [&](const LinearP& l1, const LinearP& l2, int x) {
        int hid = g.relu(forward_linear(g, l1, x));
        if (training_ && cfg_.dropout > 0.0 && train_rng_)
            hid = g.dropout(hid, cfg_.dropout, *train_rng_);
        return forward_linear(g, l2, hid);
    };

    if (cfg_.arch == Arch::A0) return mlp2(head_l1_, head_l2_, embed);
    if (cfg_.arch == Arch::A1) return mlp2(head_l1_, head_l2_, h_node);

    int slots_flat = -1;
    if (arch_has_workspace(cfg_.arch)) {
        std::vector<int> parts(kSlots);
        for (int k = 0; k < kSlots; ++k)
            parts[k] = (occupied[k] && k < n_active) ? slot_nodes[k] : zeros16;
        slots_flat = g.concat(parts);
        if (out) out->slots_flat_node = slots_flat;
    }

    if (cfg_.arch == Arch::B1 || cfg_.arch == Arch::BcLinear || cfg_.arch == Arch::BcMlp ||
        cfg_.arch == Arch::BcRandProj) {
        int feat = slots_flat;
        if (cfg_.arch == Arch::BcLinear || cfg_.arch == Arch::BcRandProj)
            feat = forward_linear(g, bneck_l1_, slots_flat);
        else if (cfg_.arch == Arch::BcMlp)
            feat = forward_linear(g, bneck_l2_, g.relu(forward_linear(g, bneck_l1_, slots_flat)));
        int final_node = mlp2(read_l1_, read_l2_, g.concat({h_node, feat}));
        if (cfg_.arch != Arch::B1 && out) {
            int conf_logit = forward_linear(g, conf_, feat);
            out->z_self_node = feat;
            out->z_self = g.val(feat);
            out->conf_logit_node = conf_logit;
            out->confidence = 1.0 / (1.0 + std::exp(-g.val(conf_logit).data[0]));
            out->has_confidence = true;
        }
        return final_node;
    }

    // self-model family: draft head, broadcast, self code, confidence, routing
    int draft, bcast;
    if (cfg_.arch == Arch::B2) {
        std::vector<int> on;
        for (int k = 0; k < n_active && k < kSlots; ++k)
            if (occupied[k]) on.push_back(slot_nodes[k]);
        if (on.empty()) {
            bcast = zeros16;
        } else {
            int acc = on[0];
            for (size_t i = 1; i < on.size(); ++i) acc = g.add(acc, on[i]);
            bcast = g.scale_shift(acc, 1.0 / static_cast<double>(on.size()), 0.0);
        }
        draft = mlp2(read_l1_, read_l2_, g.concat({h_node, slots_flat}));
    } else {  // HotOnly
        bcast = zeros16;
        draft = mlp2(read_l1_, read_l2_, h_node);
    }

    UncertaintyScalars us = uncertainty_scalars(g.val(draft));
    int unc = g.constant(std::vector<double>{us.entropy, us.margin});
    int z = g.tanh_(forward_linear(g, self_in_, g.concat({h_node, bcast, draft, unc})));

    if (ov && ov->self_lesion != SelfLesion::None) {
        switch (ov->self_lesion) {
            case SelfLesion::Zero:
                z = g.constant(Tensor::zeros({kZSelfDim}));
                break;
            case SelfLesion::Noise: {
                if (!ov->lesion_mu || !ov->lesion_sd || !ov->noise_rng)
                    throw std::runtime_error("noise lesion needs calibrated moments and a stream");
                Tensor t = Tensor::zeros({kZSelfDim});
                for (int i = 0; i < kZSelfDim; ++i)
                    t.data[i] = (*ov->lesion_mu)[i] + (*ov->lesion_sd)[i] * ov->noise_rng->normal();
                z = g.constant(t);
                break;
            }
            case SelfLesion::Permute: {
                if (!ov->permute_pool || ov->permute_pool->empty() || !ov->noise_rng)
                    throw std::runtime_error("permute lesion needs a donor pool and a stream");
                int idx = ov->noise_rng->uniform_int(0, static_cast<int>(ov->permute_pool->size()) - 1);
                z = g.constant((*ov->permute_pool)[idx]);
                break;
            }
            default: break;
        }
    }

    int conf_logit = forward_linear(g, conf_, z);
    int final_node =
        routing == Routing::ZSelf ? mlp2(zh_l1_, zh_l2_, z) : draft;

    if (out) {
        out->draft_node = draft;
        out->draft_logits = g.val(draft);
        out->z_self_node = z;
        out->z_self = g.val(z);
        out->conf_logit_node = conf_logit;
        out->confidence = 1.0 / (1.0 + std::exp(-g.val(conf_logit).data[0]));
        out->has_confidence = true;
        if (cfg_.arch == Arch::B2) {
            out->broadcast = g.val(bcast);
            out->aux_logit_node = forward_linear(g, aux_, slots_flat);
        }
    }
    return final_node;
}

AgentStepOutput Agent::step(const ObsTensor& obs, const EvalOverrides& ov) {
    if (!g_) throw std::runtime_error("Agent::step called before begin_episode");
    Graph& g = *g_;
    AgentStepOutput out;

    const int n_active = active_slots(ov.capacity_scale);
    Routing routing = ov.routing.value_or(cfg_.routing);
    if (routing == Routing::ZSelf && cfg_.arch != Arch::B2)
        throw std::runtime_error("z-self action routing requires the B2 self-model");

    Rng* nrng = ov.noise_rng;
    Rng* srng = training_ ? train_rng_ : nrng;
    const double slot_sigma = training_ ? cfg_.train_slot_noise : ov.slot_noise;
    const bool pulse_now =
        ov.pulse_sigma > 0.0 && ov.pulse_rng && step_idx_ == ov.pulse_step;

    RoutedObs routed = strong_lesion_route(obs, cfg_.strong_lesion);

    int embed = forward_encoder(g, enc_, g.constant(routed.trunk.grid),
                                g.constant(routed.trunk.task_vec),
                                g.constant(routed.trunk.cue16));
    if (ov.embed_noise > 0.0 && nrng)
        embed = g.add(embed, noise_const(g, kEmbedDim, ov.embed_noise, *nrng));
    if (pulse_now && cfg_.arch == Arch::A0)
        embed = g.add(embed, noise_const(g, kEmbedDim, ov.pulse_sigma, *ov.pulse_rng));

    if (arch_is_recurrent(cfg_.arch)) {
        int h = forward_gru(g, gru_, embed, h_node_);
        if (ov.hidden_noise > 0.0 && nrng)
            h = g.add(h, noise_const(g, kHiddenDim, ov.hidden_noise, *nrng));
        if (pulse_now && (cfg_.arch == Arch::A1 || cfg_.arch == Arch::HotOnly))
            h = g.add(h, noise_const(g, kHiddenDim, ov.pulse_sigma, *ov.pulse_rng));
        h_node_ = h;
    }

    if (arch_has_workspace(cfg_.arch)) {
        if (pulse_now) {
            for (int k = 0; k < n_active && k < kSlots; ++k)
                if (ws_.occupied[k])
                    ws_.slot_node[k] =
                        g.add(ws_.slot_node[k], noise_const(g, kSlotDim, ov.pulse_sigma, *ov.pulse_rng));
        }
        double amax = 0.0;
        for (double v : routed.write_cue16.data) amax = std::max(amax, std::fabs(v));
        if (n_active > 0 && amax > 1e-9) {
            // recurrent features plus the delivered cue channel project to a
            // bounded write code; under the strong lesion the cue half is the
            // only route the cue content has into the agent
            int cue = g.constant(routed.write_cue16);
            int wnode = g.tanh_(forward_linear(g, write_, g.concat({h_node_, cue})));
            int k = -1;
            for (int i = 0; i < n_active; ++i)
                if (!ws_.occupied[i]) {
                    k = i;
                    break;
                }
            if (k < 0) k = 0;  // workspace full: evict the oldest convention
            ws_.slot_node[k] = wnode;
            ws_.occupied[k] = true;
            out.wrote = true;
            out.write_slot = k;
            out.write_vec = g.val(wnode);
        }
        if (slot_sigma > 0.0 && srng) {
            for (int k = 0; k < n_active && k < kSlots; ++k)
                if (ws_.occupied[k])
                    ws_.slot_node[k] =
                        g.add(ws_.slot_node[k], noise_const(g, kSlotDim, slot_sigma, *srng));
        }
        if (ov.frozen_slots) {
            if (!ov.frozen_occupied) throw std::runtime_error("frozen slots need occupancy flags");
            const Tensor& fs = ov.frozen_slots->at(step_idx_);
            const auto& fo = ov.frozen_occupied->at(step_idx_);
            for (int k = 0; k < kSlots; ++k) {
                if (fo[k]) {
                    Tensor sl = Tensor::zeros({kSlotDim});
                    for (int i = 0; i < kSlotDim; ++i) sl.data[i] = fs.data[k * kSlotDim + i];
                    ws_.slot_node[k] = g.constant(sl);
                    ws_.occupied[k] = true;
                } else {
                    ws_.slot_node[k] = -1;
                    ws_.occupied[k] = false;
                }
            }
        }
    }

    int final_node = read_heads(g, h_node_, embed, ws_.slot_node, ws_.occupied, n_active,
                                zeros16_node_, routing, &ov, &out);

    out.final_node = final_node;
    out.final_logits = g.val(final_node);
    g.check_finite(final_node, "final logits");
    if (!arch_has_self_model(cfg_.arch)) {
        out.draft_node = final_node;
        out.draft_logits = out.final_logits;
    }
    int best = 0;
    for (int i = 1; i < kNumActions; ++i)
        if (out.final_logits.data[i] > out.final_logits.data[best]) best = i;
    out.action = best;

    if (h_node_ >= 0) out.h = g.val(h_node_);
    if (arch_has_workspace(cfg_.arch)) {
        out.occupied = ws_.occupied;
        if (out.slots_flat_node >= 0) out.slots_flat = g.val(out.slots_flat_node);
        out.pci_latent = out.slots_flat;
    } else if (cfg_.arch == Arch::A0) {
        out.pci_latent = g.val(embed);
    } else {
        out.pci_latent = out.h;
    }

    ++step_idx_;
    return out;
}

int Agent::build_readout(Graph& g, const Tensor& h_val, const std::vector<int>& slot_inputs,
                         const std::vector<bool>& occupied, int n_active, Routing routing) const {
    if (!arch_has_workspace(cfg_.arch))
        throw std::runtime_error("readout audit requires a workspace architecture");
    if (static_cast<int>(slot_inputs.size()) != kSlots ||
        static_cast<int>(occupied.size()) != kSlots)
        throw std::runtime_error("readout audit needs one input leaf per slot");
    int h = g.constant(h_val);
    int zeros16 = g.constant(Tensor::zeros({kSlotDim}));
    return read_heads(g, h, -1, slot_inputs, occupied, n_active, zeros16, routing, nullptr,
                      nullptr);
}

std::string Agent::save_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["arch"] = arch_name(cfg_.arch);
    j["strong_lesion"] = cfg_.strong_lesion;
    j["routing"] = routing_name(cfg_.routing);
    j["dropout"] = cfg_.dropout;
    j["train_slot_noise"] = cfg_.train_slot_noise;
    j["init_seed"] = init_seed_;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& e : store_.ps) {
        params[e.name] = {{"shape", e.value.shape}, {"data", e.value.data}};
    }
    j["params"] = std::move(params);
    return j.dump();
}

Agent Agent::load_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("schema_version").get<int>() != 1)
        throw std::runtime_error("unsupported agent checkpoint schema");
    AgentConfig cfg;
    cfg.arch = arch_from_name(j.at("arch").get<std::string>());
    cfg.strong_lesion = j.at("strong_lesion").get<bool>();
    cfg.routing = routing_from_name(j.at("routing").get<std::string>());
    cfg.dropout = j.at("dropout").get<double>();
    cfg.train_slot_noise = j.at("train_slot_noise").get<double>();
    Agent a(cfg, j.at("init_seed").get<uint64_t>());
    const auto& params = j.at("params");
    if (static_cast<int>(params.size()) != a.store_.count())
        throw std::runtime_error("checkpoint parameter set does not match the architecture");
    for (auto it = params.begin(); it != params.end(); ++it) {
        int idx = a.store_.find(it.key());
        if (idx < 0) throw std::runtime_error("unknown parameter '" + it.key() + "' in checkpoint");
        auto& e = a.store_.ps[idx];
        auto shape = it.value().at("shape").get<std::vector<int>>();
        if (shape != e.value.shape)
            throw std::runtime_error("shape mismatch for parameter '" + it.key() + "'");
        auto data = it.value().at("data").get<std::vector<double>>();
        if (data.size() != e.value.data.size())
            throw std::runtime_error("size mismatch for parameter '" + it.key() + "'");
        e.value.data = std::move(data);
    }
    return a;
}

}  // namespace agentlab
