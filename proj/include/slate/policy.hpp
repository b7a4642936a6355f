#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ast.hpp"
#include "policy_base.hpp"
#include "refine.hpp"
#include "rng.hpp"

namespace slate {

class PolicyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dense kernels.  Single-threaded; rows are processed four at a time so the
// compiler can keep four independent accumulators vectorized.
namespace nn {

// y += W x, W row-major (rows x cols)
inline void matvec_acc(const double* __restrict W, const double* __restrict x,
                       double* __restrict y, int rows, int cols) {
    int r = 0;
    for (; r + 4 <= rows; r += 4) {
        const double* w0 = W + static_cast<size_t>(r) * cols;
        const double* w1 = w0 + cols;
        const double* w2 = w1 + cols;
        const double* w3 = w2 + cols;
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
#pragma omp simd reduction(+ : a0, a1, a2, a3)
        for (int j = 0; j < cols; ++j) {
            double v = x[j];
            a0 += w0[j] * v;
            a1 += w1[j] * v;
            a2 += w2[j] * v;
            a3 += w3[j] * v;
        }
        y[r] += a0;
        y[r + 1] += a1;
        y[r + 2] += a2;
        y[r + 3] += a3;
    }
    for (; r < rows; ++r) {
        const double* w = W + static_cast<size_t>(r) * cols;
        double a = 0.0;
#pragma omp simd reduction(+ : a)
        for (int j = 0; j < cols; ++j) a += w[j] * x[j];
        y[r] += a;
    }
}

// dx += W^T g
inline void matvec_t_acc(const double* __restrict W, const double* __restrict g,
                         double* __restrict dx, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        double gv = g[r];
        if (gv == 0.0) continue;
        const double* w = W + static_cast<size_t>(r) * cols;
#pragma omp simd
        for (int j = 0; j < cols; ++j) dx[j] += w[j] * gv;
    }
}

// dW += g x^T
inline void outer_acc(double* __restrict dW, const double* __restrict g,
                      const double* __restrict x, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        double gv = g[r];
        if (gv == 0.0) continue;
        double* w = dW + static_cast<size_t>(r) * cols;
#pragma omp simd
        for (int j = 0; j < cols; ++j) w[j] += gv * x[j];
    }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace nn

struct GruLayerParams {
    int in = 0;
    std::vector<double> wz, uz, bz; // update gate:    z = sigmoid(Wz x + Uz h + bz)
    std::vector<double> wr, ur, br; // reset gate:     r = sigmoid(Wr x + Ur h + br)
    std::vector<double> wn, un, bn; // candidate:      n = tanh(Wn x + Un (r*h) + bn)
};

// Full parameter set of the recurrent policy: a stack of GRU layers fed by
// the previous token's one-hot, a two-layer head (tanh hidden, 4 logits), a
// (class, kind) variable-embedding table with a reserved trailing row for
// unknown classes, and a learned scene vector used as the initial hidden
// state of every layer.
struct PolicyParams {
    static constexpr int kTokenDim = 4;

    int hidden = 64;
    int num_layers = 3;
    int trained_epochs = 0;
    std::vector<std::string> class_vocab;
    std::vector<GruLayerParams> layers;
    std::vector<double> head_w1, head_b1; // H x H, H
    std::vector<double> head_w2, head_b2; // 4 x H, 4
    std::vector<double> embed;            // (vocab+1) * 4 kinds * H
    std::vector<double> scene;            // H

    static PolicyParams make(int hidden, std::vector<std::string> vocab, int num_layers = 3) {
        if (hidden < 1 || num_layers < 1)
            throw std::invalid_argument("policy needs positive hidden size and layer count");
        PolicyParams p;
        p.hidden = hidden;
        p.num_layers = num_layers;
        p.class_vocab = std::move(vocab);
        p.layers.resize(num_layers);
        for (int l = 0; l < num_layers; ++l) {
            GruLayerParams& lp = p.layers[l];
            lp.in = l == 0 ? kTokenDim : hidden;
            size_t w = static_cast<size_t>(hidden) * lp.in;
            size_t u = static_cast<size_t>(hidden) * hidden;
            lp.wz.assign(w, 0.0);
            lp.uz.assign(u, 0.0);
            lp.bz.assign(hidden, 0.0);
            lp.wr.assign(w, 0.0);
            lp.ur.assign(u, 0.0);
            lp.br.assign(hidden, 0.0);
            lp.wn.assign(w, 0.0);
            lp.un.assign(u, 0.0);
            lp.bn.assign(hidden, 0.0);
        }
        p.head_w1.assign(static_cast<size_t>(hidden) * hidden, 0.0);
        p.head_b1.assign(hidden, 0.0);
        p.head_w2.assign(static_cast<size_t>(kTokenDim) * hidden, 0.0);
        p.head_b2.assign(kTokenDim, 0.0);
        p.embed.assign((p.class_vocab.size() + 1) * 4 * static_cast<size_t>(hidden), 0.0);
        p.scene.assign(hidden, 0.0);
        return p;
    }

    // Same shapes and metadata, all values zero (gradient / moment buffers).
    PolicyParams shape_clone() const { return make(hidden, class_vocab, num_layers); }

    void init_random(uint64_t seed) {
        Rng rng(derive_seed(seed, 0x1717));
        double scale = 1.0 / std::sqrt(static_cast<double>(hidden));
        auto fill = [&](std::vector<double>& a) {
            for (double& v : a) v = (rng.uniform01() * 2.0 - 1.0) * scale;
        };
        for (auto& lp : layers) {
            fill(lp.wz);
            fill(lp.uz);
            fill(lp.bz);
            fill(lp.wr);
            fill(lp.ur);
            fill(lp.br);
            fill(lp.wn);
            fill(lp.un);
            fill(lp.bn);
        }
        fill(head_w1);
        fill(head_b1);
        fill(head_w2);
        fill(head_b2);
        fill(embed);
        fill(scene);
    }

    // Unknown classes map to the reserved final row block.
    int class_index(const std::string& name) const {
        for (size_t i = 0; i < class_vocab.size(); ++i)
            if (class_vocab[i] == name) return static_cast<int>(i);
        return static_cast<int>(class_vocab.size());
    }

    const double* embed_row(int cls, Kind k) const {
        return embed.data() +
               (static_cast<size_t>(cls) * 4 + static_cast<size_t>(k)) * hidden;
    }

    size_t param_count() const {
        size_t n = 0;
        for (const auto& lp : layers)
            n += lp.wz.size() + lp.uz.size() + lp.bz.size() + lp.wr.size() + lp.ur.size() +
                 lp.br.size() + lp.wn.size() + lp.un.size() + lp.bn.size();
        return n + head_w1.size() + head_b1.size() + head_w2.size() + head_b2.size() +
               embed.size() + scene.size();
    }
};

// Named views of every parameter array, in a stable order shared by the
// checkpoint format, the optimizer, and gradient checks.
inline std::vector<std::pair<std::string, std::vector<double>*>> param_arrays(PolicyParams& p) {
    std::vector<std::pair<std::string, std::vector<double>*>> out;
    for (size_t l = 0; l < p.layers.size(); ++l) {
        std::string base = "gru" + std::to_string(l) + ".";
        GruLayerParams& lp = p.layers[l];
        out.emplace_back(base + "wz", &lp.wz);
        out.emplace_back(base + "uz", &lp.uz);
        out.emplace_back(base + "bz", &lp.bz);
        out.emplace_back(base + "wr", &lp.wr);
        out.emplace_back(base + "ur", &lp.ur);
        out.emplace_back(base + "br", &lp.br);
        out.emplace_back(base + "wn", &lp.wn);
        out.emplace_back(base + "un", &lp.un);
        out.emplace_back(base + "bn", &lp.bn);
    }
    out.emplace_back("head.w1", &p.head_w1);
    out.emplace_back("head.b1", &p.head_b1);
    out.emplace_back("head.w2", &p.head_w2);
    out.emplace_back("head.b2", &p.head_b2);
    out.emplace_back("embed", &p.embed);
    out.emplace_back("scene", &p.scene);
    return out;
}

inline std::vector<std::pair<std::string, const std::vector<double>*>> param_arrays(
    const PolicyParams& p) {
    std::vector<std::pair<std::string, const std::vector<double>*>> out;
    for (auto& [name, vec] : param_arrays(const_cast<PolicyParams&>(p)))
        out.emplace_back(name, vec);
    return out;
}

// Activations recorded by one forward step, enough to replay it backwards.
struct GruTapeStep {
    Token input = Token::Start;
    int target = -1;                // decision index, -1 when not a loss step
    std::vector<double> h_in;       // layers*H, hidden before the update
    std::vector<double> z, r, n;    // layers*H gate values
    std::vector<double> head_t;     // H
    std::array<double, 3> probs{};
};

struct GruWork {
    std::vector<double> az, ar, an, rh, t;
};

inline void gru_init_state(const PolicyParams& P, std::vector<double>& h) {
    h.assign(static_cast<size_t>(P.num_layers) * P.hidden, 0.0);
    for (int l = 0; l < P.num_layers; ++l)
        std::copy(P.scene.begin(), P.scene.end(), h.begin() + static_cast<size_t>(l) * P.hidden);
}

inline void gru_add_embedding(const PolicyParams& P, int cls, Kind k, std::vector<double>& h) {
    const double* row = P.embed_row(cls, k);
    for (int l = 0; l < P.num_layers; ++l) {
        double* hl = h.data() + static_cast<size_t>(l) * P.hidden;
        for (int i = 0; i < P.hidden; ++i) hl[i] += row[i];
    }
}

// One recurrent step: feeds the previous token one-hot through the GRU
// stack, then the head; returns the distribution over {Left, Right, Stop}
// (the Start logit is masked out — Start is input-only).
inline std::array<double, 3> gru_step(const PolicyParams& P, std::vector<double>& h, Token prev,
                                      GruWork& w, GruTapeStep* tape = nullptr) {
    const int H = P.hidden;
    const int L = P.num_layers;
    w.az.resize(H);
    w.ar.resize(H);
    w.an.resize(H);
    w.rh.resize(H);
    w.t.resize(H);

    if (tape) {
        tape->input = prev;
        tape->h_in.assign(h.begin(), h.end());
        tape->z.resize(static_cast<size_t>(L) * H);
        tape->r.resize(static_cast<size_t>(L) * H);
        tape->n.resize(static_cast<size_t>(L) * H);
    }

    double x0[PolicyParams::kTokenDim] = {0.0, 0.0, 0.0, 0.0};
    x0[static_cast<int>(prev)] = 1.0;
    const double* x = x0;
    int xdim = PolicyParams::kTokenDim;

    for (int l = 0; l < L; ++l) {
        const GruLayerParams& lp = P.layers[l];
        double* hl = h.data() + static_cast<size_t>(l) * H;

        std::copy(lp.bz.begin(), lp.bz.end(), w.az.begin());
        nn::matvec_acc(lp.wz.data(), x, w.az.data(), H, xdim);
        nn::matvec_acc(lp.uz.data(), hl, w.az.data(), H, H);

        std::copy(lp.br.begin(), lp.br.end(), w.ar.begin());
        nn::matvec_acc(lp.wr.data(), x, w.ar.data(), H, xdim);
        nn::matvec_acc(lp.ur.data(), hl, w.ar.data(), H, H);

        for (int i = 0; i < H; ++i) {
            double r = nn::sigmoid(w.ar[i]);
            w.ar[i] = r;
            w.rh[i] = r * hl[i];
        }

        std::copy(lp.bn.begin(), lp.bn.end(), w.an.begin());
        nn::matvec_acc(lp.wn.data(), x, w.an.data(), H, xdim);
        nn::matvec_acc(lp.un.data(), w.rh.data(), w.an.data(), H, H);

        for (int i = 0; i < H; ++i) {
            double z = nn::sigmoid(w.az[i]);
            double n = std::tanh(w.an[i]);
            if (tape) {
                tape->z[static_cast<size_t>(l) * H + i] = z;
                tape->r[static_cast<size_t>(l) * H + i] = w.ar[i];
                tape->n[static_cast<size_t>(l) * H + i] = n;
            }
            hl[i] = (1.0 - z) * hl[i] + z * n;
        }
        x = hl;
        xdim = H;
    }

    std::copy(P.head_b1.begin(), P.head_b1.end(), w.t.begin());
    nn::matvec_acc(P.head_w1.data(), h.data() + static_cast<size_t>(L - 1) * H, w.t.data(), H, H);
    for (int i = 0; i < H; ++i) w.t[i] = std::tanh(w.t[i]);

    double logits[PolicyParams::kTokenDim];
    std::copy(P.head_b2.begin(), P.head_b2.end(), logits);
    nn::matvec_acc(P.head_w2.data(), w.t.data(), logits, PolicyParams::kTokenDim, H);

    double mx = std::max({logits[1], logits[2], logits[3]});
    double e0 = std::exp(logits[1] - mx);
    double e1 = std::exp(logits[2] - mx);
    double e2 = std::exp(logits[3] - mx);
    double s = e0 + e1 + e2;
    std::array<double, 3> probs{e0 / s, e1 / s, e2 / s};
    if (!std::isfinite(probs[0]) || !std::isfinite(probs[1]) || !std::isfinite(probs[2])) {
        double hmax = 0.0;
        for (double v : h) hmax = std::max(hmax, std::abs(v));
        throw PolicyError("non-finite policy output (logits " + std::to_string(logits[1]) + ", " +
                          std::to_string(logits[2]) + ", " + std::to_string(logits[3]) +
                          "; max |hidden| " + std::to_string(hmax) + ")");
    }

    if (tape) {
        tape->head_t.assign(w.t.begin(), w.t.end());
        tape->probs = probs;
    }
    return probs;
}

class GruPolicy final : public Policy {
public:
    explicit GruPolicy(PolicyParams params) : params_(std::move(params)) {
        gru_init_state(params_, h_);
    }

    PolicyParams& params() { return params_; }
    const PolicyParams& params() const { return params_; }

    void reset(const DesignSpec&) override { gru_init_state(params_, h_); }

    void begin_variable(const VarRef& var, const std::string& type_name) override {
        gru_add_embedding(params_, params_.class_index(type_name), var.kind, h_);
    }

    std::array<double, 3> step(Token prev) override {
        return gru_step(params_, h_, prev, work_);
    }

    PolicySnapshot save() const override { return std::make_shared<std::vector<double>>(h_); }

    void load(const PolicySnapshot& snap) override {
        h_ = *std::static_pointer_cast<const std::vector<double>>(snap);
    }

    const std::vector<double>& state() const { return h_; }

private:
    PolicyParams params_;
    std::vector<double> h_;
    GruWork work_;
};

// Baseline: every decision token equally likely; forward checking alone
// carries the constraints.
class UniformPolicy final : public Policy {
public:
    void reset(const DesignSpec&) override {}
    void begin_variable(const VarRef&, const std::string&) override {}
    std::array<double, 3> step(Token) override {
        return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    }
    PolicySnapshot save() const override { return nullptr; }
    void load(const PolicySnapshot&) override {}
};

inline std::unique_ptr<Policy> uniform_policy() { return std::make_unique<UniformPolicy>(); }

} // namespace slate
