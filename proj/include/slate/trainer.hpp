#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ast.hpp"
#include "policy.hpp"
#include "refine.hpp"
#include "rng.hpp"
#include "search.hpp"

namespace slate {

class TrainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CheckpointVersionError : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};

struct Dataset {
    DesignSpec spec;
    std::vector<Layout> layouts;
};

// One variable's slice of a supervised episode: the decision string that
// refines `initial` down to the layout's value, ending in Stop.
struct VarSegment {
    VarRef var;
    std::string class_name;
    Interval initial;
    DecisionString targets;
};

struct EncodedExample {
    std::vector<VarSegment> segments;

    size_t token_count() const {
        size_t n = 0;
        for (const auto& s : segments) n += s.targets.size();
        return n;
    }
};

// Turns a concrete layout into the token sequence the policy should emit for
// it.  Variables follow variable_order; with shuffle set, new objects are
// permuted (fresh per epoch) while given objects stay first in declaration
// order, matching how inference orders its decisions.
inline EncodedExample encode_example(const DesignSpec& spec, const Layout& layout, Rng* rng,
                                     bool shuffle) {
    if (layout.size() != spec.objects.size())
        throw TrainError("layout has " + std::to_string(layout.size()) + " boxes but the spec has " +
                         std::to_string(spec.objects.size()) + " objects");
    std::vector<VarRef> order =
        variable_order(spec, shuffle ? OrderMode::Training : OrderMode::Inference, rng);
    EncodedExample ex;
    ex.segments.reserve(order.size());
    for (const VarRef& v : order) {
        VarSegment seg;
        seg.var = v;
        seg.class_name = spec.objects[v.obj].type_name;
        seg.initial = spec.scene_domain.of(v.kind);
        unit_t value = layout[v.obj].get(v.kind);
        if (!seg.initial.contains(value))
            throw TrainError("value " + std::to_string(value) + " for " +
                             std::to_string(spec.objects[v.obj].id) + "." + to_string(v.kind) +
                             " lies outside the initial domain [" + std::to_string(seg.initial.lo) +
                             ", " + std::to_string(seg.initial.hi) + "]");
        seg.targets = encode(value, seg.initial);
        ex.segments.push_back(std::move(seg));
    }
    return ex;
}

// Mean negative log-likelihood per decision.
inline double nll_loss(const std::vector<std::array<double, 3>>& probs,
                       const std::vector<Token>& targets) {
    if (probs.size() != targets.size())
        throw std::invalid_argument("probability and target sequences differ in length");
    if (probs.empty()) throw std::invalid_argument("empty sequence has no likelihood");
    double sum = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        double p = probs[i][static_cast<size_t>(decision_index(targets[i]))];
        if (!(p > 0.0))
            throw TrainError("zero probability for the target decision at step " +
                             std::to_string(i));
        sum -= std::log(p);
    }
    return sum / static_cast<double>(probs.size());
}

struct EpisodeTape {
    struct Segment {
        int cls = 0;
        Kind kind = Kind::X;
        std::vector<GruTapeStep> steps;
    };
    std::vector<Segment> segments;
};

struct TfCounters {
    long long teacher_forced = 0;
    long long free_running = 0;
};

namespace detail {

// Picks the input token for the step after `probs` was emitted: the ground
// truth under teacher forcing, otherwise a sample from the masked output.
// The mask keeps tokens legal for the ground-truth interval; feasibility
// under the constraint is deliberately not consulted here.
inline Token next_input(const std::array<double, 3>& probs, Token target, const Interval& iv,
                        Rng& rng, double tf_p, TfCounters* counters) {
    if (rng.uniform01() < tf_p) {
        if (counters) ++counters->teacher_forced;
        return target;
    }
    if (counters) ++counters->free_running;
    TokenSet legal;
    auto mask = legal_decisions(iv);
    for (int i = 0; i < 3; ++i)
        if (mask[static_cast<size_t>(i)]) legal.add(decision_token(i));
    std::array<double, 3> dist = resample_distribution(probs, legal.inverted());
    return decision_token(static_cast<int>(rng.categorical(dist.data(), 3)));
}

} // namespace detail

// Teacher-forced, deterministic episode loss (mean NLL per token).  This is
// the quantity finite differences probe during gradient checks.
inline double episode_loss(const PolicyParams& params, const EncodedExample& ex) {
    std::vector<double> h;
    gru_init_state(params, h);
    GruWork work;
    double sum = 0.0;
    size_t tokens = 0;
    for (const VarSegment& seg : ex.segments) {
        gru_add_embedding(params, params.class_index(seg.class_name), seg.var.kind, h);
        Token prev = Token::Start;
        for (Token t : seg.targets) {
            auto probs = gru_step(params, h, prev, work);
            double p = probs[static_cast<size_t>(decision_index(t))];
            if (!(p > 0.0)) throw TrainError("zero probability for the target decision");
            sum -= std::log(p);
            ++tokens;
            prev = t;
        }
    }
    if (tokens == 0) throw TrainError("example encodes no decisions");
    return sum / static_cast<double>(tokens);
}

namespace detail {

struct GradWork {
    std::vector<double> dh;          // layers * H
    std::vector<double> hout;        // layers * H, recomputed per step
    std::vector<double> dz, dn, dr, dan, daz, dar, drh, rh, dx, dt, dat;
};

// Forward pass that records a tape.  Inputs beyond each segment's leading
// Start are chosen by a teacher-forcing coin; targets always follow the
// ground truth.  Returns the summed NLL.
inline double episode_forward(const PolicyParams& params, const EncodedExample& ex, Rng& rng,
                              double tf_p, EpisodeTape& tape, TfCounters* counters) {
    std::vector<double> h;
    gru_init_state(params, h);
    GruWork work;
    tape.segments.clear();
    tape.segments.reserve(ex.segments.size());
    double sum = 0.0;
    for (const VarSegment& seg : ex.segments) {
        EpisodeTape::Segment ts;
        ts.cls = params.class_index(seg.class_name);
        ts.kind = seg.var.kind;
        ts.steps.resize(seg.targets.size());
        gru_add_embedding(params, ts.cls, ts.kind, h);
        Token prev = Token::Start;
        VarState vs(seg.initial);
        for (size_t j = 0; j < seg.targets.size(); ++j) {
            GruTapeStep& st = ts.steps[j];
            auto probs = gru_step(params, h, prev, work, &st);
            Token target = seg.targets[j];
            st.target = decision_index(target);
            double p = probs[static_cast<size_t>(st.target)];
            if (!(p > 0.0))
                throw TrainError("zero probability for the target decision at step " +
                                 std::to_string(j));
            sum -= std::log(p);
            if (j + 1 < seg.targets.size()) {
                prev = next_input(probs, target, vs.iv, rng, tf_p, counters);
                auto applied = apply_token(vs, target);
                vs = std::get<VarState>(applied);
            }
        }
        tape.segments.push_back(std::move(ts));
    }
    return sum;
}

// Reverse pass over a recorded tape.  Gradients of (summed NLL) * scale are
// accumulated into `grads`; layers unwind top-down within each step so that
// dx can flow into the hidden gradient of the layer below.
inline void episode_backward(const PolicyParams& params, const EpisodeTape& tape, double scale,
                             PolicyParams& grads, GradWork& w) {
    const int H = params.hidden;
    const int L = params.num_layers;
    const size_t lh = static_cast<size_t>(L) * H;
    w.dh.assign(lh, 0.0);
    w.hout.resize(lh);
    auto sized = [&](std::vector<double>& v) { v.resize(static_cast<size_t>(H)); };
    sized(w.dz);
    sized(w.dn);
    sized(w.dr);
    sized(w.dan);
    sized(w.daz);
    sized(w.dar);
    sized(w.drh);
    sized(w.rh);
    sized(w.dt);
    sized(w.dat);
    w.dx.resize(static_cast<size_t>(std::max(H, PolicyParams::kTokenDim)));

    for (size_t si = tape.segments.size(); si-- > 0;) {
        const auto& seg = tape.segments[si];
        for (size_t sj = seg.steps.size(); sj-- > 0;) {
            const GruTapeStep& st = seg.steps[sj];

            for (size_t i = 0; i < lh; ++i)
                w.hout[i] = (1.0 - st.z[i]) * st.h_in[i] + st.z[i] * st.n[i];

            // head: dlogits over the three live outputs, Start row untouched
            double dlogits[PolicyParams::kTokenDim] = {0.0, 0.0, 0.0, 0.0};
            for (int k = 0; k < 3; ++k) {
                double g = st.probs[static_cast<size_t>(k)] - (k == st.target ? 1.0 : 0.0);
                dlogits[k + 1] = g * scale;
            }
            nn::outer_acc(grads.head_w2.data(), dlogits, st.head_t.data(),
                          PolicyParams::kTokenDim, H);
            for (int k = 0; k < PolicyParams::kTokenDim; ++k) grads.head_b2[k] += dlogits[k];
            std::fill(w.dt.begin(), w.dt.end(), 0.0);
            nn::matvec_t_acc(params.head_w2.data(), dlogits, w.dt.data(),
                             PolicyParams::kTokenDim, H);
            const double* htop = w.hout.data() + static_cast<size_t>(L - 1) * H;
            for (int i = 0; i < H; ++i)
                w.dat[i] = w.dt[i] * (1.0 - st.head_t[i] * st.head_t[i]);
            nn::outer_acc(grads.head_w1.data(), w.dat.data(), htop, H, H);
            for (int i = 0; i < H; ++i) grads.head_b1[i] += w.dat[i];
            nn::matvec_t_acc(params.head_w1.data(), w.dat.data(),
                             w.dh.data() + static_cast<size_t>(L - 1) * H, H, H);

            double x0[PolicyParams::kTokenDim] = {0.0, 0.0, 0.0, 0.0};
            x0[static_cast<int>(st.input)] = 1.0;

            for (int l = L - 1; l >= 0; --l) {
                const GruLayerParams& lp = params.layers[l];
                GruLayerParams& gp = grads.layers[l];
                const size_t off = static_cast<size_t>(l) * H;
                const double* hp = st.h_in.data() + off;
                const double* z = st.z.data() + off;
                const double* r = st.r.data() + off;
                const double* n = st.n.data() + off;
                double* dho = w.dh.data() + off;
                const double* x = l == 0 ? x0 : w.hout.data() + off - H;
                const int xdim = l == 0 ? PolicyParams::kTokenDim : H;

                for (int i = 0; i < H; ++i) {
                    double g = dho[i];
                    w.dz[i] = g * (n[i] - hp[i]);
                    w.dn[i] = g * z[i];
                    dho[i] = g * (1.0 - z[i]); // reused as dh_prev accumulator
                    w.dan[i] = w.dn[i] * (1.0 - n[i] * n[i]);
                    w.daz[i] = w.dz[i] * z[i] * (1.0 - z[i]);
                    w.rh[i] = r[i] * hp[i];
                }

                nn::outer_acc(gp.wn.data(), w.dan.data(), x, H, xdim);
                nn::outer_acc(gp.un.data(), w.dan.data(), w.rh.data(), H, H);
                for (int i = 0; i < H; ++i) gp.bn[i] += w.dan[i];

                std::fill(w.drh.begin(), w.drh.end(), 0.0);
                nn::matvec_t_acc(lp.un.data(), w.dan.data(), w.drh.data(), H, H);
                for (int i = 0; i < H; ++i) {
                    w.dr[i] = w.drh[i] * hp[i];
                    dho[i] += w.drh[i] * r[i];
                    w.dar[i] = w.dr[i] * r[i] * (1.0 - r[i]);
                }

                nn::outer_acc(gp.wz.data(), w.daz.data(), x, H, xdim);
                nn::outer_acc(gp.wr.data(), w.dar.data(), x, H, xdim);
                nn::outer_acc(gp.uz.data(), w.daz.data(), hp, H, H);
                nn::outer_acc(gp.ur.data(), w.dar.data(), hp, H, H);
                for (int i = 0; i < H; ++i) {
                    gp.bz[i] += w.daz[i];
                    gp.br[i] += w.dar[i];
                }
                nn::matvec_t_acc(lp.uz.data(), w.daz.data(), dho, H, H);
                nn::matvec_t_acc(lp.ur.data(), w.dar.data(), dho, H, H);

                if (l > 0) {
                    std::fill(w.dx.begin(), w.dx.begin() + xdim, 0.0);
                    nn::matvec_t_acc(lp.wz.data(), w.daz.data(), w.dx.data(), H, xdim);
                    nn::matvec_t_acc(lp.wr.data(), w.dar.data(), w.dx.data(), H, xdim);
                    nn::matvec_t_acc(lp.wn.data(), w.dan.data(), w.dx.data(), H, xdim);
                    double* below = w.dh.data() + off - H;
                    for (int i = 0; i < H; ++i) below[i] += w.dx[i];
                }
            }
        }
        // crossing the segment's embedding add: gradient copies into the row
        double* row = grads.embed.data() +
                      (static_cast<size_t>(seg.cls) * 4 + static_cast<size_t>(seg.kind)) * H;
        for (int l = 0; l < L; ++l) {
            const double* dhl = w.dh.data() + static_cast<size_t>(l) * H;
            for (int i = 0; i < H; ++i) row[i] += dhl[i];
        }
    }
    for (int l = 0; l < L; ++l) {
        const double* dhl = w.dh.data() + static_cast<size_t>(l) * H;
        for (int i = 0; i < H; ++i) grads.scene[i] += dhl[i];
    }
}

} // namespace detail

// Gradients of (mean NLL per token) * weight for one example, accumulated
// into `grads`.  Returns the example's mean NLL.
inline double episode_grad(const PolicyParams& params, const EncodedExample& ex, Rng& rng,
                           double tf_p, double weight, PolicyParams& grads,
                           TfCounters* counters = nullptr) {
    EpisodeTape tape;
    double sum = detail::episode_forward(params, ex, rng, tf_p, tape, counters);
    size_t tokens = ex.token_count();
    if (tokens == 0) throw TrainError("example encodes no decisions");
    detail::GradWork work;
    detail::episode_backward(params, tape, weight / static_cast<double>(tokens), grads, work);
    return sum / static_cast<double>(tokens);
}

struct AdamState {
    PolicyParams m, v;
    long long t = 0;

    explicit AdamState(const PolicyParams& like) : m(like.shape_clone()), v(like.shape_clone()) {}
};

inline double grad_norm(const PolicyParams& grads) {
    double sq = 0.0;
    for (auto& [name, vec] : param_arrays(grads))
        for (double g : *vec) sq += g * g;
    return std::sqrt(sq);
}

inline void clip_gradients(PolicyParams& grads, double max_norm) {
    double norm = grad_norm(grads);
    if (norm <= max_norm || norm == 0.0) return;
    double k = max_norm / norm;
    for (auto& [name, vec] : param_arrays(grads))
        for (double& g : *vec) g *= k;
}

inline void adam_step(PolicyParams& params, const PolicyParams& grads, AdamState& state,
                      double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    ++state.t;
    double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    auto ps = param_arrays(params);
    auto gs = param_arrays(const_cast<PolicyParams&>(grads));
    auto ms = param_arrays(state.m);
    auto vs = param_arrays(state.v);
    for (size_t a = 0; a < ps.size(); ++a) {
        std::vector<double>& p = *ps[a].second;
        const std::vector<double>& g = *gs[a].second;
        std::vector<double>& m = *ms[a].second;
        std::vector<double>& v = *vs[a].second;
        for (size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
}

struct TrainConfig {
    double lr = 1e-4;
    int batch = 8;
    int epochs = 100;
    double teacher_forcing_p = 0.5;
    double clip_norm = 5.0;
    bool shuffle_objects = true;
    uint64_t seed = 0;
    int start_epoch = 0; // carried from a resumed checkpoint
    std::function<void(int epoch, double loss)> on_epoch;
};

struct TrainStats {
    std::vector<double> epoch_loss;
    TfCounters inputs;
};

// Minibatch SGD over the dataset.  Examples are re-encoded every epoch with
// a fresh object shuffle; every stream of randomness is derived from the
// config seed plus the epoch/example index, so runs are reproducible and a
// resumed run continues the exact schedule.
inline TrainStats train(PolicyParams& params, const Dataset& data, const TrainConfig& cfg) {
    if (data.layouts.empty()) throw TrainError("empty dataset");
    if (cfg.batch < 1) throw TrainError("batch size must be positive");
    TrainStats stats;
    AdamState adam(params);
    const size_t count = data.layouts.size();
    std::vector<EncodedExample> encoded(count);
    std::vector<size_t> perm(count);

    for (int e = 0; e < cfg.epochs; ++e) {
        const int epoch = cfg.start_epoch + e;
        for (size_t i = 0; i < count; ++i) {
            Rng enc_rng(derive_seed(cfg.seed, 0xE1C0DE, static_cast<uint64_t>(epoch), i));
            encoded[i] = encode_example(data.spec, data.layouts[i], &enc_rng, cfg.shuffle_objects);
        }
        std::iota(perm.begin(), perm.end(), size_t{0});
        Rng order_rng(derive_seed(cfg.seed, 0x0DE, static_cast<uint64_t>(epoch)));
        for (size_t i = count; i > 1; --i)
            std::swap(perm[i - 1], perm[order_rng.uniform_int(0, static_cast<long long>(i) - 1)]);

        double epoch_sum = 0.0;
        PolicyParams grads = params.shape_clone();
        for (size_t start = 0; start < count; start += static_cast<size_t>(cfg.batch)) {
            size_t end = std::min(count, start + static_cast<size_t>(cfg.batch));
            double weight = 1.0 / static_cast<double>(end - start);
            for (auto& [name, vec] : param_arrays(grads)) std::fill(vec->begin(), vec->end(), 0.0);
            for (size_t b = start; b < end; ++b) {
                size_t idx = perm[b];
                Rng ex_rng(derive_seed(cfg.seed, 0x5A3B1E, static_cast<uint64_t>(epoch), idx));
                epoch_sum += episode_grad(params, encoded[idx], ex_rng, cfg.teacher_forcing_p,
                                          weight, grads, &stats.inputs);
            }
            clip_gradients(grads, cfg.clip_norm);
            adam_step(params, grads, adam, cfg.lr);
        }
        double epoch_loss = epoch_sum / static_cast<double>(count);
        if (!std::isfinite(epoch_loss))
            throw TrainError("training diverged: non-finite loss in epoch " +
                             std::to_string(epoch));
        stats.epoch_loss.push_back(epoch_loss);
        params.trained_epochs = epoch + 1;
        if (cfg.on_epoch) cfg.on_epoch(epoch, epoch_loss);
    }
    return stats;
}

inline constexpr int kCheckpointFormatVersion = 1;

inline nlohmann::json to_checkpoint_json(const PolicyParams& params) {
    nlohmann::json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["hidden_size"] = params.hidden;
    j["num_layers"] = params.num_layers;
    j["class_vocab"] = params.class_vocab;
    j["trained_epochs"] = params.trained_epochs;
    nlohmann::json arrays = nlohmann::json::object();
    for (auto& [name, vec] : param_arrays(params)) arrays[name] = *vec;
    j["params"] = std::move(arrays);
    return j;
}

inline PolicyParams from_checkpoint_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("format_version"))
        throw CheckpointError("checkpoint is missing format_version");
    if (!j["format_version"].is_number_integer() ||
        j["format_version"].get<int>() != kCheckpointFormatVersion)
        throw CheckpointVersionError("unsupported checkpoint format_version " +
                                     j["format_version"].dump());
    try {
        PolicyParams p = PolicyParams::make(j.at("hidden_size").get<int>(),
                                            j.at("class_vocab").get<std::vector<std::string>>(),
                                            j.at("num_layers").get<int>());
        p.trained_epochs = j.value("trained_epochs", 0);
        const nlohmann::json& arrays = j.at("params");
        size_t used = 0;
        for (auto& [name, vec] : param_arrays(p)) {
            if (!arrays.contains(name))
                throw CheckpointError("checkpoint is missing parameter array '" + name + "'");
            auto values = arrays.at(name).get<std::vector<double>>();
            if (values.size() != vec->size())
                throw CheckpointError("parameter array '" + name + "' has " +
                                      std::to_string(values.size()) + " values, expected " +
                                      std::to_string(vec->size()));
            *vec = std::move(values);
            ++used;
        }
        if (arrays.size() != used)
            throw CheckpointError("checkpoint contains unknown parameter arrays");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
    }
}

inline void save_checkpoint(const PolicyParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot open '" + path + "' for writing");
    out << to_checkpoint_json(params).dump();
    out.close();
    if (!out) throw CheckpointError("failed writing checkpoint to '" + path + "'");
}

inline PolicyParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
    }
    return from_checkpoint_json(j);
}

} // namespace slate
