#ifndef ADALAB_GDSIM_HPP
#define ADALAB_GDSIM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "adalab/convex.hpp"
#include "adalab/rng.hpp"
#include "adalab/sq.hpp"
#include "adalab/vec.hpp"

namespace adalab {

// ---------------------------------------------------------------------------
// Boolean analyst trees
// ---------------------------------------------------------------------------

// Complete binary tree of depth T holding the query a Boolean analyst asks
// after each sign-prefix of answers. Heap layout: node 1 is the root, node v
// has children 2v (previous answer +1) and 2v+1 (previous answer -1).
struct BooleanAnalystTree {
    int T = 0;
    int n = 0;                 // domain size
    std::vector<Query> nodes;  // index 0 unused

    int num_nodes() const { return (1 << T) - 1; }
    const Query& query(int node) const { return nodes.at(node); }
    static int child(int node, int answer) { return answer == 1 ? 2 * node : 2 * node + 1; }

    static BooleanAnalystTree random(int T, int n, Rng rng) {
        if (T < 1 || n < 1) throw std::invalid_argument("BooleanAnalystTree: T,n >= 1");
        BooleanAnalystTree tree;
        tree.T = T;
        tree.n = n;
        tree.nodes.resize(1 << T);
        for (int v = 1; v < (1 << T); ++v)
            tree.nodes[v] = Query::random(n, rng);
        return tree;
    }
};

// Boolean analyst that walks a materialized tree: descends to the +1 child
// on a nonnegative answer, else to the -1 child.
class TreeAnalyst : public Analyst {
public:
    explicit TreeAnalyst(BooleanAnalystTree tree) : tree_(std::move(tree)) {}
    int horizon() const override { return tree_.T; }
    bool is_boolean() const override { return true; }
    std::vector<Query> next_queries(const std::vector<double>& prev_answers) override {
        if (!prev_answers.empty())
            node_ = BooleanAnalystTree::child(node_, prev_answers.at(0) >= 0.0 ? 1 : -1);
        if (node_ > tree_.num_nodes())
            throw std::runtime_error("TreeAnalyst: horizon exhausted");
        return {tree_.query(node_)};
    }
    int current_node() const { return node_; }

private:
    BooleanAnalystTree tree_;
    int node_ = 1;
};

// Materializes the full tree of a Boolean analyst by replaying a fresh
// analyst instance along every sign-prefix.
inline BooleanAnalystTree materialize_tree(
    const std::function<std::unique_ptr<Analyst>()>& factory, int T, int n) {
    BooleanAnalystTree tree;
    tree.T = T;
    tree.n = n;
    tree.nodes.resize(1 << T);
    for (int v = 1; v < (1 << T); ++v) {
        // sign path from the root to node v
        std::vector<int> path;
        for (int u = v; u > 1; u /= 2) path.push_back(u % 2 == 0 ? 1 : -1);
        std::reverse(path.begin(), path.end());

        std::unique_ptr<Analyst> a = factory();
        if (a->width() != 1)
            throw std::invalid_argument("materialize_tree: analyst must have width 1");
        std::vector<Query> batch = a->next_queries({});
        for (const int s : path) batch = a->next_queries({static_cast<double>(s)});
        if (batch.at(0).size() != n)
            throw std::invalid_argument("materialize_tree: query domain mismatch");
        tree.nodes[v] = std::move(batch[0]);
    }
    return tree;
}

// ---------------------------------------------------------------------------
// The simulating function
// ---------------------------------------------------------------------------

inline int sim_dimension(int T) { return 4 * (1 << T) - 3; }

// The recursive max structure
//   f_t(w,x) = max( h1(q_node, P0 w, x), h2(P0 w), c*eta,
//                   f_{t-1}(child+, P+ w, x), f_{t-1}(child-, P- w, x) )
// with   h1(q;u,x) = u(1) - a(1+q(x)) u(2) - a(1-q(x)) u(3)
//        h2(u)     = max{ (2+xi2) u(2) + u(3) - u(4), (2+xi3) u(3) + u(2) - u(5) }
// where P0 takes the first five coordinates of the node's slice, P+ the
// slice positions 4,6,8,..., and P- the positions 5,7,9,.... xi2, xi3 are
// drawn independently per node from U[0, eta^4] and break branch ties.
//
// Subgradient selection: the first maximizing piece in depth-first node
// order (per node: h1, h2 branch 1, h2 branch 2), with the constant floor
// c*eta losing all ties; its gradient is 0.
class SimFunction : public StochasticConvexFunction {
public:
    SimFunction(BooleanAnalystTree tree, double eta, double a, double c, double eps,
                std::uint64_t seed)
        : tree_(std::move(tree)), eta_(eta), a_(a), c_(c), eps_(eps) {
        if (!(eta > 0.0)) throw std::invalid_argument("SimFunction: eta > 0 required");
        if (!(a <= 1.0 / 16.0 && a > 0.0))
            throw std::invalid_argument("SimFunction: constraint violated: 0 < a <= 1/16");
        if (!(c > 0.0 && c < 3.0 * a - 12.0 * eps))
            throw std::invalid_argument(
                "SimFunction: constraint violated: 0 < c < 3a - 12*eps "
                "(floor would freeze or swallow the trajectory)");

        const int N = tree_.num_nodes();
        Rng rng = Rng(seed).split("xi");
        xi2_.resize(N + 1);
        xi3_.resize(N + 1);
        for (int v = 1; v <= N; ++v) {
            xi2_[v] = rng.uniform(0.0, std::pow(eta, 4));
            xi3_[v] = rng.uniform(0.0, std::pow(eta, 4));
        }

        // global coordinate lists per node: the root owns 0..dim-1; a node's
        // children own the alternating tail positions of its own list
        coords_.resize(N + 1);
        coords_[1].resize(sim_dimension(tree_.T));
        for (int i = 0; i < static_cast<int>(coords_[1].size()); ++i) coords_[1][i] = i;
        for (int v = 1; v <= N; ++v) {
            if (2 * v > N) continue;
            const auto& L = coords_[v];
            for (std::size_t p = 3; p < L.size(); p += 2) coords_[2 * v].push_back(L[p]);
            for (std::size_t p = 4; p < L.size(); p += 2) coords_[2 * v + 1].push_back(L[p]);
        }
    }

    int dim() const override { return sim_dimension(tree_.T); }
    int domain_size() const override { return tree_.n; }
    double lipschitz() const override { return 4.0; }
    double eta() const { return eta_; }
    double a() const { return a_; }
    double c() const { return c_; }
    double eps() const { return eps_; }
    double floor_value() const { return c_ * eta_; }
    const BooleanAnalystTree& tree() const { return tree_; }
    const std::vector<int>& coords(int node) const { return coords_.at(node); }
    double xi2(int node) const { return xi2_.at(node); }
    double xi3(int node) const { return xi3_.at(node); }

    // Value and gradient of the h1 piece at a node (the per-round table for
    // odd rounds): h1 depends on the node's query at the sample point x.
    FirstOrderInfo h1_info(int node, const Vec& w, int x) const {
        const auto& L = coords_[node];
        const Query& q = tree_.query(node);
        const double cp = a_ * (1.0 + q(x));
        const double cm = a_ * (1.0 - q(x));
        FirstOrderInfo info;
        info.value = w.at(L[0]) - cp * w.at(L[1]) - cm * w.at(L[2]);
        info.gradient.assign(dim(), 0.0);
        info.gradient[L[0]] = 1.0;
        info.gradient[L[1]] = -cp;
        info.gradient[L[2]] = -cm;
        return info;
    }

    // Value and gradient of the h2 piece at a node (x-independent).
    FirstOrderInfo h2_info(int node, const Vec& w) const {
        const auto& L = coords_[node];
        const double b1 = (2.0 + xi2_[node]) * w.at(L[1]) + w.at(L[2]) - w.at(L[3]);
        const double b2 = (2.0 + xi3_[node]) * w.at(L[2]) + w.at(L[1]) - w.at(L[4]);
        FirstOrderInfo info;
        info.gradient.assign(dim(), 0.0);
        if (b1 >= b2) {
            info.value = b1;
            info.gradient[L[1]] = 2.0 + xi2_[node];
            info.gradient[L[2]] = 1.0;
            info.gradient[L[3]] = -1.0;
        } else {
            info.value = b2;
            info.gradient[L[2]] = 2.0 + xi3_[node];
            info.gradient[L[1]] = 1.0;
            info.gradient[L[4]] = -1.0;
        }
        return info;
    }

    FirstOrderInfo eval(const Vec& w, int x) const override {
        Best best;
        best_piece(1, w, x, best);
        FirstOrderInfo info;
        info.value = best.value;
        switch (best.kind) {
            case Best::H1: info = h1_info(best.node, w, x); break;
            case Best::H2B1:
            case Best::H2B2: info = h2_info(best.node, w); break;
            case Best::Floor:
                info.value = floor_value();
                info.gradient.assign(dim(), 0.0);
                break;
        }
        return info;
    }

    // Gap between the top two piece values, scaled by twice the Lipschitz
    // bound: a lower bound on the distance to the nearest argmax change.
    double smooth_margin(const Vec& w, int x) const override {
        std::vector<double> vals;
        vals.push_back(floor_value());
        for (int v = 1; v <= tree_.num_nodes(); ++v) {
            const auto& L = coords_[v];
            const Query& q = tree_.query(v);
            vals.push_back(w.at(L[0]) - a_ * (1.0 + q(x)) * w.at(L[1]) -
                           a_ * (1.0 - q(x)) * w.at(L[2]));
            vals.push_back((2.0 + xi2_[v]) * w.at(L[1]) + w.at(L[2]) - w.at(L[3]));
            vals.push_back((2.0 + xi3_[v]) * w.at(L[2]) + w.at(L[1]) - w.at(L[4]));
        }
        double top = -std::numeric_limits<double>::infinity(), second = top;
        for (const double v : vals) {
            if (v > top) {
                second = top;
                top = v;
            } else if (v > second) {
                second = v;
            }
        }
        return (top - second) / 8.0;
    }

private:
    struct Best {
        enum Kind { H1, H2B1, H2B2, Floor } kind = Floor;
        int node = 0;
        double value = -std::numeric_limits<double>::infinity();
    };

    // Depth-first enumeration; strict > keeps the earliest piece on ties,
    // and the floor (enumerated last) loses every tie.
    void best_piece(int node, const Vec& w, int x, Best& best) const {
        const auto& L = coords_[node];
        const Query& q = tree_.query(node);
        const double h1 =
            w[L[0]] - a_ * (1.0 + q(x)) * w[L[1]] - a_ * (1.0 - q(x)) * w[L[2]];
        if (h1 > best.value) best = {Best::H1, node, h1};
        const double b1 = (2.0 + xi2_[node]) * w[L[1]] + w[L[2]] - w[L[3]];
        if (b1 > best.value) best = {Best::H2B1, node, b1};
        const double b2 = (2.0 + xi3_[node]) * w[L[2]] + w[L[1]] - w[L[4]];
        if (b2 > best.value) best = {Best::H2B2, node, b2};
        if (2 * node <= tree_.num_nodes()) {
            best_piece(2 * node, w, x, best);
            best_piece(2 * node + 1, w, x, best);
        }
        if (node == 1 && floor_value() > best.value)
            best = {Best::Floor, 0, floor_value()};
    }

    BooleanAnalystTree tree_;
    double eta_, a_, c_, eps_;
    std::vector<double> xi2_, xi3_;
    std::vector<std::vector<int>> coords_;
};

inline SimFunction build_sim_function(BooleanAnalystTree tree, double eta, double a,
                                      double c, std::uint64_t seed,
                                      double eps = 1.0 / 400.0) {
    return SimFunction(std::move(tree), eta, a, c, eps, seed);
}

// ---------------------------------------------------------------------------
// Answering mechanisms and gradient access functions
// ---------------------------------------------------------------------------

// kappa_i consumes simulation-space oracle outputs O(1)..O(2i): the base case
// answers +1 iff coordinate 4 of the node's slice of O(2) is < -1/2 (the h2
// first branch's -e4 showed up); the recursion drops the first two outputs
// and descends into the child indicated by the base answer.
inline int kappa(const SimFunction& f, int i, const std::vector<Vec>& outputs) {
    if (static_cast<int>(outputs.size()) < 2 * i)
        throw std::invalid_argument("kappa: needs outputs through round 2i");
    int node = 1;
    int idx = 1; // outputs[1] = O(2)
    for (int level = 1; level < i; ++level) {
        const bool plus = outputs[idx].at(f.coords(node)[3]) < -0.5;
        node = BooleanAnalystTree::child(node, plus ? 1 : -1);
        idx += 2;
    }
    return outputs[idx].at(f.coords(node)[3]) < -0.5 ? 1 : -1;
}

// rho_t: the per-round gradient access table entry. The answer prefix must
// have length floor((t-1)/2); it selects the tree node whose level-1 pieces
// (h1 at odd rounds, h2 at even rounds) are served.
inline FirstOrderInfo rho(const SimFunction& f, int t, const std::vector<int>& answers,
                          const Vec& w, int x) {
    const int depth = (t - 1) / 2;
    if (static_cast<int>(answers.size()) != depth)
        throw std::invalid_argument("rho: answer prefix length " +
                                    std::to_string(answers.size()) + ", expected " +
                                    std::to_string(depth));
    int node = 1;
    for (int j = 0; j < depth; ++j) node = BooleanAnalystTree::child(node, answers[j]);
    return t % 2 == 1 ? f.h1_info(node, w, x) : f.h2_info(node, w);
}

// ---------------------------------------------------------------------------
// Hiding embedding
// ---------------------------------------------------------------------------

// Coordinate permutation of R^d with the image of coordinate 1 pinned.
// hide() maps simulation coordinates into the big space (padding with
// zeros), unhide() applies the transpose.
class HidingEmbedding {
public:
    explicit HidingEmbedding(std::vector<int> perm) : perm_(std::move(perm)) {
        if (perm_.empty() || perm_[0] != 0)
            throw std::invalid_argument("HidingEmbedding: coordinate 1 must be pinned");
        std::vector<char> seen(perm_.size(), 0);
        for (const int p : perm_) {
            if (p < 0 || p >= static_cast<int>(perm_.size()) || seen[p])
                throw std::invalid_argument("HidingEmbedding: not a permutation");
            seen[p] = 1;
        }
    }

    static HidingEmbedding identity(int d) {
        std::vector<int> perm(d);
        for (int i = 0; i < d; ++i) perm[i] = i;
        return HidingEmbedding(std::move(perm));
    }

    static HidingEmbedding random(int d, Rng rng) {
        std::vector<int> perm(d);
        for (int i = 0; i < d; ++i) perm[i] = i;
        for (int i = d - 1; i >= 2; --i) {
            // Fisher-Yates over positions 1..d-1 (position 0 stays pinned)
            const int j = 1 + static_cast<int>(rng.next_below(i));
            std::swap(perm[i], perm[j]);
        }
        return HidingEmbedding(std::move(perm));
    }

    int dim() const { return static_cast<int>(perm_.size()); }
    int image(int sim_coord) const { return perm_.at(sim_coord); }

    Vec hide(const Vec& sim) const {
        if (sim.size() > perm_.size())
            throw std::invalid_argument("HidingEmbedding: vector exceeds target dimension");
        Vec big(perm_.size(), 0.0);
        for (std::size_t i = 0; i < sim.size(); ++i) big[perm_[i]] = sim[i];
        return big;
    }

    Vec unhide(const Vec& big, int sim_dim) const {
        if (big.size() != perm_.size())
            throw std::invalid_argument("HidingEmbedding: dimension mismatch");
        Vec sim(sim_dim);
        for (int i = 0; i < sim_dim; ++i) sim[i] = big[perm_[i]];
        return sim;
    }

private:
    std::vector<int> perm_;
};

// ---------------------------------------------------------------------------
// Running the simulation
// ---------------------------------------------------------------------------

struct SimTranscript {
    std::vector<Vec> trajectory;     // w_1..w_{2T+1}, big space
    std::vector<Vec> outputs;        // O(1)..O(2T), big space
    std::vector<Vec> outputs_sim;    // same, pulled back to simulation space
    std::vector<FoTable> tables;     // per-round gradient access tables, big space
    std::vector<int> answers;        // a_1..a_T in {-1,+1}
    std::vector<int> node_path;      // tree node answering query i
    std::vector<double> path_popvals; // q_i(D) along the realized path
    bool projections_identity = true;
    bool regime_ok = true;
    double eta = 0.0;
    std::uint64_t seed = 0;
};

// The 2T-round loop: serve the round-t access table, receive O(t), take a
// gradient step, and extract an answer at every even round. The projection
// is applied but asserted to be the identity (recorded, not fatal), and the
// parameter-regime precondition T < min(1/4eta, 1/24eps), eta < sqrt(eps/48)
// is checked and reported in the transcript.
inline SimTranscript run_simulation(const SimFunction& f, FoOracle& oracle,
                                    const FiniteDistribution& D, int m,
                                    std::uint64_t seed, const HidingEmbedding& sigma) {
    if (D.size() != f.domain_size())
        throw std::invalid_argument("run_simulation: domain mismatch");
    if (sigma.dim() < f.dim())
        throw std::invalid_argument("run_simulation: hiding dimension below sim dimension");
    const int T = f.tree().T;
    const double eta = f.eta();

    SimTranscript tr;
    tr.eta = eta;
    tr.seed = seed;
    tr.regime_ok = T < std::min(1.0 / (4.0 * eta), 1.0 / (24.0 * f.eps())) &&
                   eta < std::sqrt(f.eps() / 48.0);

    const Sample sample = draw_sample(D, m, seed);
    FiniteDomain big_domain = D.domain();
    oracle.init(big_domain, sample, Rng(seed).split("sim-oracle"));

    Vec w = sigma.hide(basis(f.dim(), 0, eta));
    int node = 1;
    for (int t = 1; t <= 2 * T; ++t) {
        tr.trajectory.push_back(w);
        const Vec w_sim = sigma.unhide(w, f.dim());

        FoTable table(D.size());
        for (int x = 0; x < D.size(); ++x) {
            FirstOrderInfo info = rho(f, t, tr.answers, w_sim, x);
            info.gradient = sigma.hide(info.gradient);
            table[x] = std::move(info);
        }
        tr.tables.push_back(table);

        const Vec O = oracle.estimate(t, w, table);
        if (!all_finite(O))
            throw std::runtime_error("run_simulation: non-finite oracle output at round " +
                                     std::to_string(t));
        tr.outputs.push_back(O);
        tr.outputs_sim.push_back(sigma.unhide(O, f.dim()));

        axpy(w, -eta, O);
        if (norm2(w) > 1.0) {
            tr.projections_identity = false;
            w = project_unit_ball(std::move(w));
        }

        if (t % 2 == 0) {
            const int i = t / 2;
            const int a = kappa(f, i, tr.outputs_sim);
            tr.answers.push_back(a);
            tr.node_path.push_back(node);
            tr.path_popvals.push_back(population_value(f.tree().query(node), D));
            node = BooleanAnalystTree::child(node, a);
        }
    }
    tr.trajectory.push_back(w);
    return tr;
}

struct SimVerdict {
    int t0 = 0;
    bool premise = false;        // eps1-accuracy held for all t < t0
    bool table_ok = true;        // access table equals true (f, grad f) at w_t0
    bool answer_checked = false; // t0 even and accuracy also held at t0
    bool answer_ok = true;       // sign answer consistent with q_i(D) at margin eps2
    bool pass = true;
};

// The conditional simulation contract, evaluated per t0 against the stored
// transcript: vacuous when the accuracy premise already failed earlier.
inline std::vector<SimVerdict> check_sim_accuracy(const SimTranscript& tr,
                                                  const SimFunction& f,
                                                  const FiniteDistribution& D,
                                                  const HidingEmbedding& sigma,
                                                  double eps1, double eps2,
                                                  double table_tol = 1e-9) {
    const int rounds = static_cast<int>(tr.outputs.size());
    std::vector<double> acc_err(rounds);
    for (int t = 0; t < rounds; ++t) {
        const Vec w_sim = sigma.unhide(tr.trajectory[t], f.dim());
        acc_err[t] = dist2(tr.outputs_sim[t], population_gradient(f, D, w_sim));
    }

    std::vector<SimVerdict> verdicts;
    bool premise = true;
    for (int t0 = 1; t0 <= rounds; ++t0) {
        SimVerdict v;
        v.t0 = t0;
        v.premise = premise; // accuracy held for all t < t0
        if (v.premise) {
            const Vec w_sim = sigma.unhide(tr.trajectory[t0 - 1], f.dim());
            for (int x = 0; x < D.size() && v.table_ok; ++x) {
                const FirstOrderInfo truth = f.eval(w_sim, x);
                const FirstOrderInfo& served = tr.tables[t0 - 1][x];
                if (std::abs(truth.value - served.value) > table_tol ||
                    dist2(sigma.hide(truth.gradient), served.gradient) > table_tol)
                    v.table_ok = false;
            }
            if (t0 % 2 == 0 && acc_err[t0 - 1] <= eps1) {
                v.answer_checked = true;
                const int i = t0 / 2;
                const double qD = tr.path_popvals.at(i - 1);
                v.answer_ok = tr.answers.at(i - 1) == 1 ? qD > -eps2 : qD < eps2;
            }
        }
        v.pass = !v.premise || (v.table_ok && v.answer_ok);
        verdicts.push_back(v);
        premise = premise && acc_err[t0 - 1] <= eps1;
    }
    return verdicts;
}

// ---------------------------------------------------------------------------
// Statistical-query oracle backed by a first-order oracle on the simulation
// ---------------------------------------------------------------------------

struct GdSimParams {
    double eta = 1.0 / 800.0;
    double a = 1.0 / 16.0;
    double c = 1.0 / 8.0;
    double eps = 1.0 / 400.0;
};

// Per analyst query: advance the inner GD two rounds against the first-order
// oracle (serving access tables), extract the sign answer via kappa, and
// descend the materialized tree. The incoming query must match the tree node
// reached by the answers given so far.
class GdSimSqOracle : public SqOracle {
public:
    GdSimSqOracle(BooleanAnalystTree tree, std::unique_ptr<FoOracle> foa,
                  GdSimParams params, HidingEmbedding sigma, std::uint64_t build_seed)
        : f_(std::move(tree), params.eta, params.a, params.c, params.eps, build_seed),
          foa_(std::move(foa)), sigma_(std::move(sigma)) {
        if (sigma_.dim() < f_.dim())
            throw std::invalid_argument("sq_oracle_from_foa: hiding dimension too small");
    }

    void init(const FiniteDomain& domain, const Sample& sample, Rng rng) override {
        if (domain.n != f_.domain_size())
            throw std::invalid_argument("sq_oracle_from_foa: domain mismatch");
        foa_->init(domain, sample, rng.split("foa"));
        w_ = sigma_.hide(basis(f_.dim(), 0, f_.eta()));
        node_ = 1;
        answers_.clear();
        outputs_sim_.clear();
        tables_.clear();
        trajectory_.clear();
    }

    std::vector<double> answer(int round, const std::vector<Query>& batch) override {
        if (batch.size() != 1)
            throw std::runtime_error("sq_oracle_from_foa: width-1 batches only");
        if (round > f_.tree().T)
            throw std::runtime_error("sq_oracle_from_foa: inner horizon exhausted at round " +
                                     std::to_string(round));
        // The simulating function was compiled from the analyst's full tree;
        // a query differing from the materialized node means the analyst is
        // not the Boolean analyst it was compiled from.
        const Query& expected = f_.tree().query(node_);
        for (int x = 0; x < f_.domain_size(); ++x)
            if (std::abs(expected(x) - batch[0](x)) > 1e-12)
                throw std::runtime_error(
                    "sq_oracle_from_foa: query deviates from the materialized tree at round " +
                    std::to_string(round));

        for (int half = 0; half < 2; ++half) {
            const int t = 2 * (round - 1) + half + 1;
            trajectory_.push_back(w_);
            const Vec w_sim = sigma_.unhide(w_, f_.dim());
            FoTable table(f_.domain_size());
            for (int x = 0; x < f_.domain_size(); ++x) {
                FirstOrderInfo info = rho(f_, t, answers_, w_sim, x);
                info.gradient = sigma_.hide(info.gradient);
                table[x] = std::move(info);
            }
            tables_.push_back(table);
            const Vec O = foa_->estimate(t, w_, table);
            if (!all_finite(O))
                throw std::runtime_error("sq_oracle_from_foa: non-finite estimate at round " +
                                         std::to_string(t));
            outputs_sim_.push_back(sigma_.unhide(O, f_.dim()));
            axpy(w_, -f_.eta(), O);
            w_ = project_unit_ball(std::move(w_));
        }

        const int a = kappa(f_, round, outputs_sim_);
        answers_.push_back(a);
        node_ = BooleanAnalystTree::child(node_, a);
        return {static_cast<double>(a)};
    }

    const SimFunction& sim_function() const { return f_; }
    const std::vector<FoTable>& tables() const { return tables_; }
    const std::vector<Vec>& inner_trajectory() const { return trajectory_; }
    const std::vector<Vec>& outputs_sim() const { return outputs_sim_; }

private:
    SimFunction f_;
    std::unique_ptr<FoOracle> foa_;
    HidingEmbedding sigma_;
    Vec w_;
    int node_ = 1;
    std::vector<int> answers_;
    std::vector<Vec> outputs_sim_;
    std::vector<FoTable> tables_;
    std::vector<Vec> trajectory_;
};

inline std::unique_ptr<GdSimSqOracle> sq_oracle_from_foa(BooleanAnalystTree tree,
                                                         std::unique_ptr<FoOracle> foa,
                                                         GdSimParams params,
                                                         HidingEmbedding sigma,
                                                         std::uint64_t build_seed) {
    return std::make_unique<GdSimSqOracle>(std::move(tree), std::move(foa), params,
                                           std::move(sigma), build_seed);
}

// ---------------------------------------------------------------------------
// Pedagogical two-query fixture
// ---------------------------------------------------------------------------

// max{ w1 + eta - (1-q(x))/3 w2 - (1+q(x))/3 w3,
//      w2 + q+(x) w4,  w3 + q-(x) w5 }
// One adaptive branch: the round-2 gradient reveals the sign of q(D) and
// carries the answer to the follow-up query on the winning branch.
class OverviewFixture : public StochasticConvexFunction {
public:
    OverviewFixture(Query q, Query qp, Query qm, double eta)
        : q_(std::move(q)), qp_(std::move(qp)), qm_(std::move(qm)), eta_(eta) {
        if (q_.size() != qp_.size() || q_.size() != qm_.size())
            throw std::invalid_argument("OverviewFixture: query domain mismatch");
    }

    int dim() const override { return 5; }
    int domain_size() const override { return q_.size(); }
    double lipschitz() const override { return 1.5; }

    FirstOrderInfo eval(const Vec& w, int x) const override {
        const double cm = (1.0 - q_(x)) / 3.0, cp = (1.0 + q_(x)) / 3.0;
        const double v1 = w.at(0) + eta_ - cm * w.at(1) - cp * w.at(2);
        const double v2 = w.at(1) + qp_(x) * w.at(3);
        const double v3 = w.at(2) + qm_(x) * w.at(4);
        FirstOrderInfo info;
        info.gradient.assign(5, 0.0);
        if (v1 >= v2 && v1 >= v3) {
            info.value = v1;
            info.gradient = {1.0, -cm, -cp, 0.0, 0.0};
        } else if (v2 >= v3) {
            info.value = v2;
            info.gradient[1] = 1.0;
            info.gradient[3] = qp_(x);
        } else {
            info.value = v3;
            info.gradient[2] = 1.0;
            info.gradient[4] = qm_(x);
        }
        return info;
    }

private:
    Query q_, qp_, qm_;
    double eta_;
};

} // namespace adalab

#endif
