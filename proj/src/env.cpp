#include "agentlab/env.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace agentlab {

namespace {
constexpr int kGrid = 7;
constexpr int kPanelR = 3, kPanelC = 0;
constexpr int kGoalR = 5, kGoalC = 5;
// direction vectors: 0 east, 1 south, 2 west, 3 north
constexpr int kDr[4] = {0, 1, 0, -1};
constexpr int kDc[4] = {1, 0, -1, 0};

int object_at(int r, int c, TaskKind kind) {
    if (r == kGoalR && c == kGoalC) return kObjGoal;
    if (r == kPanelR && c == kPanelC) return kObjPanel;
    if (r == 0 || c == 0 || r == kGrid - 1 || c == kGrid - 1) return kObjWall;
    if (kind == TaskKind::Wagering) {
        if (r == 1 && c == 5) return kObjZoneA;
        if (r == 5 && c == 1) return kObjZoneB;
    }
    return kObjEmpty;
}

bool walkable(int r, int c, TaskKind kind) {
    int o = object_at(r, c, kind);
    return o == kObjEmpty || o == kObjGoal || o == kObjZoneA || o == kObjZoneB;
}
}  // namespace

bool is_ood_combo(int v, int u) { return u == (v + 1) % kNumCueValues; }

std::string task_kind_name(TaskKind k) {
    switch (k) {
        case TaskKind::Wagering: return "wagering";
        case TaskKind::DualTask: return "dual";
        case TaskKind::DualMasking: return "dual_masking";
    }
    return "?";
}

TaskKind task_kind_from_name(const std::string& s) {
    for (TaskKind k : {TaskKind::Wagering, TaskKind::DualTask, TaskKind::DualMasking})
        if (task_kind_name(k) == s) return k;
    throw std::runtime_error("unknown task kind '" + s + "'");
}

int GridEnv::panel_code_at(int t) const {
    const EpisodeScript& sc = script_;
    switch (sc.kind) {
        case TaskKind::DualTask:
            if (t == 0) return kCodeColor0 + sc.v;
            if (t == 1) return kCodeObject0 + sc.u;
            if (t == sc.r1) return kCodeReport1;
            if (t == sc.r2) return kCodeReport2;
            return kCodeBlank;
        case TaskKind::DualMasking:
            if (t == sc.cue_step) return kCodeObject0 + sc.u;
            if (t > sc.cue_step && t <= sc.cue_step + sc.n_masks)
                return ((t - sc.cue_step) % 2 == 1) ? kCodeMaskA : kCodeMaskB;
            if (t == sc.r2) return kCodeReport2;
            return kCodeBlank;
        case TaskKind::Wagering:
            // the panel only marks the stimulus window; which stimulus is present
            // is carried solely by the (noisy) cue vector
            if (t >= 2 && t <= 4 && !cfg_.miniature) return kCodeStim0;
            if (cfg_.miniature && t == 0) return kCodeStim0;
            if (t == sc.r1) return kCodeDecision;
            if (sc.wager && t == sc.r2) return kCodeReport1;  // wager prompt
            return kCodeBlank;
    }
    return kCodeBlank;
}

ObsTensor GridEnv::reset(Rng& rng) {
    EpisodeScript sc;
    sc.kind = cfg_.kind;
    sc.n_masks = cfg_.n_masks;
    switch (cfg_.kind) {
        case TaskKind::DualTask: {
            do {
                sc.v = rng.uniform_int(0, kNumCueValues - 1);
                sc.u = rng.uniform_int(0, kNumCueValues - 1);
            } while (is_ood_combo(sc.v, sc.u) != cfg_.ood);
            sc.r1 = rng.uniform_int(10, 14);
            sc.r2 = rng.uniform_int(20, 26);
            sc.length = 28;
            break;
        }
        case TaskKind::DualMasking: {
            sc.u = rng.uniform_int(0, kNumCueValues - 1);
            sc.cue_step = 2;
            sc.r2 = rng.uniform_int(10, 14);
            sc.length = 16;
            break;
        }
        case TaskKind::Wagering: {
            sc.s = rng.uniform_int(0, 1);
            sc.wager = rng.uniform01() < 0.5;
            if (cfg_.miniature) {
                sc.salience = 1.0;
                sc.wager = true;
                sc.r1 = 1;
                sc.r2 = 2;
                sc.length = 3;
            } else {
                sc.salience = rng.uniform(0.2, 1.0);
                sc.r1 = rng.uniform_int(9, 12);
                sc.r2 = sc.r1 + 2;
                sc.length = 16;
            }
            break;
        }
    }
    do {
        sc.start_r = rng.uniform_int(1, 5);
        sc.start_c = rng.uniform_int(1, 5);
    } while (!walkable(sc.start_r, sc.start_c, sc.kind) ||
             (sc.start_r == kGoalR && sc.start_c == kGoalC));
    sc.start_dir = rng.uniform_int(0, 3);
    script_ = sc;

    // Precompute the per-step cue channel, including wagering observation noise,
    // so replays of the same script are bit-identical.
    cue_track_.assign(sc.length, Tensor::zeros({kCueDim}));
    for (int t = 0; t < sc.length; ++t) {
        int code = panel_code_at(t);
        if (code == kCodeBlank) continue;
        Tensor& cue = cue_track_[t];
        if (sc.kind == TaskKind::Wagering && code == kCodeStim0) {
            cue.data[kCodeStim0 + sc.s] = sc.salience;
            if (!cfg_.miniature) {
                cue.data[kCodeStim0] += cfg_.stim_noise * rng.normal();
                cue.data[kCodeStim1] += cfg_.stim_noise * rng.normal();
            }
        } else {
            cue.data[code] = 1.0;
        }
    }

    t_ = 0;
    pos_r_ = sc.start_r;
    pos_c_ = sc.start_c;
    dir_ = sc.start_dir;
    decision_correct_ = false;
    decision_seen_ = false;
    build_bfs();
    return make_obs(0);
}

void GridEnv::build_bfs() {
    // BFS over (row, col, dir) poses to the goal; action preference on ties:
    // forward, then left, then right.
    constexpr int INF = 1 << 20;
    int dist[kGrid][kGrid][4];
    for (auto& plane : dist)
        for (auto& row : plane)
            for (int& d : row) d = INF;
    std::deque<std::array<int, 3>> q;
    for (int d = 0; d < 4; ++d) {
        dist[kGoalR][kGoalC][d] = 0;
        q.push_back({kGoalR, kGoalC, d});
    }
    while (!q.empty()) {
        auto [r, c, d] = q.front();
        q.pop_front();
        int base = dist[r][c][d];
        // predecessors: poses that reach (r,c,d) in one action
        // turns from same cell
        for (int pd : {(d + 1) % 4, (d + 3) % 4}) {
            if (dist[r][c][pd] > base + 1) {
                dist[r][c][pd] = base + 1;
                q.push_back({r, c, pd});
            }
        }
        // forward from the cell behind
        int pr = r - kDr[d], pc = c - kDc[d];
        if (pr >= 0 && pr < kGrid && pc >= 0 && pc < kGrid && walkable(pr, pc, script_.kind)) {
            if (dist[pr][pc][d] > base + 1) {
                dist[pr][pc][d] = base + 1;
                q.push_back({pr, pc, d});
            }
        }
    }
    for (int r = 0; r < kGrid; ++r)
        for (int c = 0; c < kGrid; ++c)
            for (int d = 0; d < 4; ++d) {
                if (r == kGoalR && c == kGoalC) {
                    bfs_action_[r][c][d] = 0;  // idle rotation on the goal
                    continue;
                }
                int best_a = 0, best = INF;
                // candidate order encodes the deterministic tie-break
                const int cand[3] = {2, 0, 1};
                for (int a : cand) {
                    int nr = r, nc = c, nd = d;
                    if (a == 2) {
                        nr = r + kDr[d];
                        nc = c + kDc[d];
                        if (!(nr >= 0 && nr < kGrid && nc >= 0 && nc < kGrid &&
                              walkable(nr, nc, script_.kind))) {
                            nr = r; nc = c;
                        }
                    } else if (a == 0) {
                        nd = (d + 3) % 4;
                    } else {
                        nd = (d + 1) % 4;
                    }
                    int v = dist[nr][nc][nd];
                    if (v < best) {
                        best = v;
                        best_a = a;
                    }
                }
                bfs_action_[r][c][d] = best_a;
            }
}

int GridEnv::nav_oracle(int r, int c, int dir) const { return bfs_action_[r][c][dir]; }

int GridEnv::oracle_action_at(int t, int r, int c, int dir) const {
    const EpisodeScript& sc = script_;
    switch (sc.kind) {
        case TaskKind::DualTask:
            if (t == sc.r1) return kFirstReportAction + sc.v;
            if (t == sc.r2) return kFirstReportAction + sc.u;
            break;
        case TaskKind::DualMasking:
            if (t == sc.r2) return kFirstReportAction + sc.u;
            break;
        case TaskKind::Wagering:
            if (t == sc.r1) return kFirstReportAction + sc.s;
            break;
    }
    return bfs_action_[r][c][dir];
}

StepInfo GridEnv::make_info(int t) const {
    const EpisodeScript& sc = script_;
    StepInfo info;
    info.step = t;
    info.panel_code = panel_code_at(t);
    info.cue_write = info.panel_code != kCodeBlank;
    switch (sc.kind) {
        case TaskKind::DualTask:
            if (t == sc.r1) {
                info.report_step = true;
                info.truth_action = kFirstReportAction + sc.v;
            } else if (t == sc.r2) {
                info.report_step = true;
                info.primary_report = true;
                info.truth_action = kFirstReportAction + sc.u;
            }
            break;
        case TaskKind::DualMasking:
            if (t == sc.r2) {
                info.report_step = true;
                info.primary_report = true;
                info.truth_action = kFirstReportAction + sc.u;
            }
            break;
        case TaskKind::Wagering:
            if (t == sc.r1) {
                info.report_step = true;
                info.truth_action = kFirstReportAction + sc.s;
            }
            if (sc.wager && t == sc.r2) info.wager_step = true;
            break;
    }
    info.oracle_action = oracle_action_at(t, pos_r_, pos_c_, dir_);
    info.oracle_dist = Tensor::zeros({7});
    info.oracle_dist.data[info.oracle_action] = 1.0;
    return info;
}

ObsTensor GridEnv::make_obs(int t) const {
    ObsTensor obs;
    obs.grid = Tensor::zeros({3, kGrid, kGrid});
    auto at = [&](int ch, int r, int c) -> double& {
        return obs.grid.data[(ch * kGrid + r) * kGrid + c];
    };
    // channel values are kept in [0, 1] so the conv trunk is well conditioned
    for (int r = 0; r < kGrid; ++r)
        for (int c = 0; c < kGrid; ++c)
            at(0, r, c) = object_at(r, c, script_.kind) / static_cast<double>(kObjZoneB);
    int code = panel_code_at(t);
    at(1, kPanelR, kPanelC) = code / 15.0;
    at(2, kPanelR, kPanelC) = code != kCodeBlank ? 1.0 : 0.0;
    at(0, pos_r_, pos_c_) = kObjAgent / static_cast<double>(kObjZoneB);
    at(1, pos_r_, pos_c_) = dir_ / 3.0;

    obs.task_vec = Tensor::zeros({7});
    double sal_now = 0.0;
    if (code >= kCodeStim0 && code <= kCodeStim1) sal_now = script_.salience;
    else if (code != kCodeBlank) sal_now = 1.0;
    obs.task_vec.data[0] = code / 15.0;
    obs.task_vec.data[1] = sal_now;
    obs.task_vec.data[2] = code == kCodeReport1 ? 1.0 : 0.0;
    obs.task_vec.data[3] = (code == kCodeReport2 || code == kCodeDecision) ? 1.0 : 0.0;
    obs.task_vec.data[4] =
        (script_.kind == TaskKind::Wagering && script_.wager && t == script_.r2) ? 1.0 : 0.0;
    obs.task_vec.data[5] = static_cast<double>(t) / kMaxEpisodeSteps;
    obs.task_vec.data[6] = 1.0;

    obs.cue16 = t < static_cast<int>(cue_track_.size()) ? cue_track_[t] : Tensor::zeros({kCueDim});
    return obs;
}

StepOutcome GridEnv::step(int action, double confidence) {
    if (action < 0 || action > 6)
        throw std::runtime_error("env: action " + std::to_string(action) + " out of range 0..6");
    if (t_ >= script_.length) throw std::runtime_error("env: step past episode end");

    StepInfo info = make_info(t_);
    StepOutcome out;

    if (script_.kind == TaskKind::Wagering && t_ == script_.r1) {
        decision_correct_ = action == info.truth_action;
        decision_seen_ = true;
    }
    if (info.wager_step) {
        if (!decision_seen_) decision_correct_ = false;
        if (confidence > 0.5) out.reward = decision_correct_ ? 1.0 : -1.0;
        else out.reward = 0.0;
    }

    // report actions (3..6) are symbolic; only 0..2 move the agent
    if (action == 0) dir_ = (dir_ + 3) % 4;
    else if (action == 1) dir_ = (dir_ + 1) % 4;
    else if (action == 2) {
        int nr = pos_r_ + kDr[dir_], nc = pos_c_ + kDc[dir_];
        if (walkable(nr, nc, script_.kind)) {
            pos_r_ = nr;
            pos_c_ = nc;
        }
    }

    ++t_;
    out.done = t_ >= script_.length;
    if (!out.done) {
        out.obs = make_obs(t_);
        out.info = make_info(t_);
    }
    return out;
}

RoutedObs strong_lesion_route(const ObsTensor& obs, bool wiring) {
    RoutedObs r;
    r.trunk = obs;
    r.write_cue16 = obs.cue16;
    if (!wiring) return r;
    // blind the trunk: panel value/active channels, the task vector, and the
    // trunk's cue copy; the write channel becomes the only cue route
    r.trunk.grid.data[(1 * kGrid + kPanelR) * kGrid + kPanelC] = 0.0;
    r.trunk.grid.data[(2 * kGrid + kPanelR) * kGrid + kPanelC] = 0.0;
    for (auto& v : r.trunk.task_vec.data) v = 0.0;
    r.trunk.cue16 = Tensor::zeros({kCueDim});
    return r;
}

}  // namespace agentlab
