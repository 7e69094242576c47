#include "agentlab/training.hpp"

#include <memory>
#include <sstream>

#include "json.hpp"

namespace agentlab {

EpisodeRecord run_episode_autonomous(Agent& a, Graph& g, GridEnv& env, Rng& env_rng,
                                     const EvalOverrides& ov) {
    EpisodeRecord rec;
    ObsTensor obs = env.reset(env_rng);
    StepInfo info = env.current_info();
    g.reset();
    a.begin_episode(g);
    bool done = false;
    while (!done) {
        AgentStepOutput out = a.step(obs, ov);
        StepOutcome sr = env.step(out.action, out.confidence);
        rec.infos.push_back(info);
        rec.steps.push_back(std::move(out));
        rec.rewards.push_back(sr.reward);
        done = sr.done;
        if (!done) {
            obs = sr.obs;
            info = sr.info;
        }
    }
    rec.script = env.script();
    return rec;
}

Trainer::Trainer(const TrainConfig& cfg)
    : cfg_(cfg),
      agent_(std::make_unique<Agent>(cfg.agent, hash_tags(cfg.seed, {0x7a17ULL}))),
      graph_(&agent_->params()),
      env_rng_(hash_tags(cfg.seed, {0xe9e5ULL})),
      train_rng_(hash_tags(cfg.seed, {0x70a15ULL})) {
    opt_.cfg = cfg.adam;
    log_csv_.push_back("episode,mean_loss,teacher_match_rate");
}

double Trainer::train_one_episode() {
    GridEnv env(cfg_.task);
    ObsTensor obs = env.reset(env_rng_);
    StepInfo info = env.current_info();
    Graph& g = graph_;
    g.reset();
    agent_->set_train_rng(&train_rng_);  // rebind here: the trainer may have been moved
    agent_->set_training(true);
    agent_->begin_episode(g);
    agent_->params().zero_grads();
    EvalOverrides ov;
    int total = -1;
    bool done = false;
    bool stim_seen = false;
    while (!done) {
        AgentStepOutput out = agent_->step(obs, ov);
        double w = (info.report_step ? 3.0 : 1.0) * (info.primary_report ? 20.0 : 1.0);
        int l = g.softmax_kl(out.final_node, info.oracle_dist, w);
        total = total < 0 ? l : g.add(total, l);
        if (out.draft_node >= 0 && out.draft_node != out.final_node) {
            // When actions are routed through the self-model head, keep the draft
            // head a valid policy too so evaluation can re-route reads through it.
            total = g.add(total, g.softmax_kl(out.draft_node, info.oracle_dist, w));
        }
        if (info.report_step && cfg_.meta_coeff > 0.0 && out.conf_logit_node >= 0) {
            double lbl = out.action == info.truth_action ? 1.0 : 0.0;
            total = g.add(total, g.bce_logit(out.conf_logit_node, lbl, cfg_.meta_coeff));
        }
        if (cfg_.aux_coeff > 0.0 && out.aux_logit_node >= 0) {
            // Dense slot probe, fired on every step: has the stimulus been shown
            // yet? Holding the target high through the delay keeps the workspace
            // trace from fading before the decision moment.
            stim_seen =
                stim_seen || info.panel_code == kCodeStim0 || info.panel_code == kCodeStim1;
            total = g.add(total,
                          g.bce_logit(out.aux_logit_node, stim_seen ? 1.0 : 0.0, cfg_.aux_coeff));
        }
        match_acc_ += out.action == info.oracle_action ? 1 : 0;
        ++step_acc_;
        StepOutcome sr = env.step(info.oracle_action);  // teacher forcing
        done = sr.done;
        if (!done) {
            obs = sr.obs;
            info = sr.info;
        }
    }
    agent_->set_training(false);
    g.backward(total);
    opt_.step(agent_->params());
    return g.val(total).data[0];
}

void Trainer::train(int n) {
    for (int i = 0; i < n; ++i) {
        loss_acc_ += train_one_episode();
        ++episode_;
        if (cfg_.log_every > 0 && episode_ % cfg_.log_every == 0) {
            std::ostringstream row;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", loss_acc_ / cfg_.log_every);
            row << episode_ << ',' << buf << ',';
            std::snprintf(buf, sizeof(buf), "%.17g",
                          step_acc_ > 0 ? static_cast<double>(match_acc_) / step_acc_ : 0.0);
            row << buf;
            log_csv_.push_back(row.str());
            loss_acc_ = 0.0;
            match_acc_ = step_acc_ = 0;
        }
    }
}

TrainReport Trainer::validate() {
    TrainReport rep;
    rep.episodes_run = episode_;
    rep.log_csv = log_csv_;
    Rng held(hash_tags(cfg_.seed, {0x4e1d0ULL}));
    GridEnv env(cfg_.task);
    EvalOverrides ov;
    long match = 0, steps = 0, rep_ok = 0, rep_n = 0;
    for (int e = 0; e < cfg_.heldout_episodes; ++e) {
        EpisodeRecord rec = run_episode_autonomous(*agent_, graph_, env, held, ov);
        for (int t = 0; t < rec.length(); ++t) {
            match += rec.steps[t].action == rec.infos[t].oracle_action ? 1 : 0;
            ++steps;
            if (rec.infos[t].report_step) {
                ++rep_n;
                rep_ok += rec.report_correct(t) ? 1 : 0;
            }
        }
    }
    rep.heldout_step_accuracy = steps > 0 ? static_cast<double>(match) / steps : 0.0;
    rep.heldout_report_accuracy = rep_n > 0 ? static_cast<double>(rep_ok) / rep_n : 0.0;
    rep.gate_passed = rep.heldout_step_accuracy >= cfg_.imitation_gate;
    return rep;
}

TrainReport Trainer::run() {
    if (episode_ < cfg_.episodes) train(cfg_.episodes - episode_);
    return validate();
}

std::string Trainer::save_state() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    nlohmann::json t;
    t["task"] = {{"kind", task_kind_name(cfg_.task.kind)},
                 {"ood", cfg_.task.ood},
                 {"stim_noise", cfg_.task.stim_noise},
                 {"n_masks", cfg_.task.n_masks},
                 {"miniature", cfg_.task.miniature}};
    t["agent"] = {{"arch", arch_name(cfg_.agent.arch)},
                  {"strong_lesion", cfg_.agent.strong_lesion},
                  {"routing", routing_name(cfg_.agent.routing)},
                  {"dropout", cfg_.agent.dropout},
                  {"train_slot_noise", cfg_.agent.train_slot_noise}};
    t["episodes"] = cfg_.episodes;
    t["heldout_episodes"] = cfg_.heldout_episodes;
    t["imitation_gate"] = cfg_.imitation_gate;
    t["meta_coeff"] = cfg_.meta_coeff;
    t["aux_coeff"] = cfg_.aux_coeff;
    t["adam"] = {{"lr", cfg_.adam.lr},
                 {"beta1", cfg_.adam.beta1},
                 {"beta2", cfg_.adam.beta2},
                 {"eps", cfg_.adam.eps},
                 {"weight_decay", cfg_.adam.weight_decay}};
    t["seed"] = cfg_.seed;
    t["log_every"] = cfg_.log_every;
    j["train"] = std::move(t);

    nlohmann::json params = nlohmann::json::object();
    nlohmann::json m = nlohmann::json::object();
    nlohmann::json v = nlohmann::json::object();
    for (const auto& e : agent_->params().ps) {
        params[e.name] = e.value.data;
        m[e.name] = e.m.data;
        v[e.name] = e.v.data;
    }
    j["params"] = std::move(params);
    j["adam"] = {{"t", opt_.t}, {"m", std::move(m)}, {"v", std::move(v)}};
    j["progress"] = {{"episode", episode_},
                     {"loss_acc", loss_acc_},
                     {"match_acc", match_acc_},
                     {"step_acc", step_acc_},
                     {"log", log_csv_}};
    j["rng"] = {{"env", env_rng_.state_string()}, {"train", train_rng_.state_string()}};
    return j.dump();
}

Trainer Trainer::load_state(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("schema_version").get<int>() != 1)
        throw std::runtime_error("unsupported trainer state schema");
    const auto& t = j.at("train");
    TrainConfig cfg;
    cfg.task.kind = task_kind_from_name(t.at("task").at("kind").get<std::string>());
    cfg.task.ood = t.at("task").at("ood").get<bool>();
    cfg.task.stim_noise = t.at("task").at("stim_noise").get<double>();
    cfg.task.n_masks = t.at("task").at("n_masks").get<int>();
    cfg.task.miniature = t.at("task").at("miniature").get<bool>();
    cfg.agent.arch = arch_from_name(t.at("agent").at("arch").get<std::string>());
    cfg.agent.strong_lesion = t.at("agent").at("strong_lesion").get<bool>();
    cfg.agent.routing = routing_from_name(t.at("agent").at("routing").get<std::string>());
    cfg.agent.dropout = t.at("agent").at("dropout").get<double>();
    cfg.agent.train_slot_noise = t.at("agent").at("train_slot_noise").get<double>();
    cfg.episodes = t.at("episodes").get<int>();
    cfg.heldout_episodes = t.at("heldout_episodes").get<int>();
    cfg.imitation_gate = t.at("imitation_gate").get<double>();
    cfg.meta_coeff = t.at("meta_coeff").get<double>();
    cfg.aux_coeff = t.at("aux_coeff").get<double>();
    cfg.adam.lr = t.at("adam").at("lr").get<double>();
    cfg.adam.beta1 = t.at("adam").at("beta1").get<double>();
    cfg.adam.beta2 = t.at("adam").at("beta2").get<double>();
    cfg.adam.eps = t.at("adam").at("eps").get<double>();
    cfg.adam.weight_decay = t.at("adam").at("weight_decay").get<double>();
    cfg.seed = t.at("seed").get<uint64_t>();
    cfg.log_every = t.at("log_every").get<int>();

    Trainer tr(cfg);
    auto& store = tr.agent_->params();
    const auto& params = j.at("params");
    const auto& adam = j.at("adam");
    if (static_cast<int>(params.size()) != store.count())
        throw std::runtime_error("trainer state parameter set does not match the architecture");
    for (auto& e : store.ps) {
        auto val = params.at(e.name).get<std::vector<double>>();
        auto mm = adam.at("m").at(e.name).get<std::vector<double>>();
        auto vv = adam.at("v").at(e.name).get<std::vector<double>>();
        if (val.size() != e.value.data.size())
            throw std::runtime_error("size mismatch for parameter '" + e.name + "'");
        e.value.data = std::move(val);
        e.m.data = std::move(mm);
        e.v.data = std::move(vv);
    }
    tr.opt_.t = adam.at("t").get<long>();
    const auto& prog = j.at("progress");
    tr.episode_ = prog.at("episode").get<int>();
    tr.loss_acc_ = prog.at("loss_acc").get<double>();
    tr.match_acc_ = prog.at("match_acc").get<long>();
    tr.step_acc_ = prog.at("step_acc").get<long>();
    tr.log_csv_ = prog.at("log").get<std::vector<std::string>>();
    tr.env_rng_.set_state(j.at("rng").at("env").get<std::string>());
    tr.train_rng_.set_state(j.at("rng").at("train").get<std::string>());
    return tr;
}

}  // namespace agentlab
