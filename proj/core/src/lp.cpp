#include "dldn/lp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace dldn {

int LinearProgram::add_row(const std::string& label, double b) {
    row_labels.push_back(label);
    rhs.push_back(b);
    return num_rows() - 1;
}

int LinearProgram::add_column(LpColumn col) {
    columns.push_back(std::move(col));
    return num_cols() - 1;
}

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::iteration_limit: return "iteration-limit";
    }
    return "?";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kReducedCostTol = 1e-9;
constexpr int kBlandStreak = 64;

// Revised simplex over the slack/artificial extension of the input, with an
// explicit dense basis inverse. Column ids: [0,n) structural, [n,n+m) slack,
// [n+m,n+2m) artificial.
class Simplex {
  public:
    explicit Simplex(const LinearProgram& lp)
        : m_(lp.num_rows()), n_(lp.num_cols()) {
        row_scale_.assign(m_, 1.0);
        row_sign_.assign(m_, 1.0);
        std::vector<double> row_max(m_, 0.0);
        for (int i = 0; i < m_; ++i) row_max[i] = std::abs(lp.rhs[i]);
        for (const LpColumn& c : lp.columns) {
            for (auto [r, v] : c.entries) row_max[r] = std::max(row_max[r], std::abs(v));
        }
        for (int i = 0; i < m_; ++i) {
            if (row_max[i] > 0) row_scale_[i] = 1.0 / row_max[i];
        }
        obj_scale_ = 0.0;
        for (const LpColumn& c : lp.columns) obj_scale_ = std::max(obj_scale_, std::abs(c.objective));
        obj_scale_ = obj_scale_ > 0 ? 1.0 / obj_scale_ : 1.0;

        b_.assign(m_, 0.0);
        for (int i = 0; i < m_; ++i) b_[i] = lp.rhs[i] * row_scale_[i];
        for (int i = 0; i < m_; ++i) {
            if (b_[i] < 0) {
                row_sign_[i] = -1.0;
                b_[i] = -b_[i];
            }
        }
        cols_.resize(n_);
        cost_.assign(n_, 0.0);
        for (int j = 0; j < n_; ++j) {
            cost_[j] = lp.columns[j].objective * obj_scale_;
            for (auto [r, v] : lp.columns[j].entries) {
                cols_[j].push_back({r, v * row_scale_[r] * row_sign_[r]});
            }
        }
    }

    LpSolution run(long iter_limit) {
        LpSolution out;
        binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) binv_[idx(i, i)] = 1.0;
        xb_ = b_;
        basis_.resize(m_);
        bool need_phase1 = false;
        for (int i = 0; i < m_; ++i) {
            if (row_sign_[i] < 0) {
                basis_[i] = n_ + m_ + i;  // artificial
                need_phase1 = true;
            } else {
                basis_[i] = n_ + i;  // slack
            }
        }

        long iters = 0;
        if (need_phase1) {
            Outcome rc = iterate(true, iter_limit, iters);
            out.iterations = iters;
            if (rc == Outcome::iteration_limit) {
                out.status = LpStatus::iteration_limit;
                return out;
            }
            double art = 0.0;
            for (int i = 0; i < m_; ++i) {
                if (basis_[i] >= n_ + m_) art += xb_[i];
            }
            if (art > kLpFeasTol) {
                out.status = LpStatus::infeasible;
                return out;
            }
            expel_artificials();
        }

        Outcome rc = iterate(false, iter_limit, iters);
        out.iterations = iters;
        if (rc == Outcome::iteration_limit) {
            out.status = LpStatus::iteration_limit;
            return out;
        }
        if (rc == Outcome::unbounded) {
            out.status = LpStatus::unbounded;
            return out;
        }

        out.status = LpStatus::optimal;
        out.primal.assign(n_, 0.0);
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < n_) out.primal[basis_[i]] = std::max(0.0, xb_[i]);
        }
        std::vector<double> y = dual_internal(false);
        out.duals.assign(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            double d = y[i] * row_sign_[i] * row_scale_[i] / obj_scale_;
            out.duals[i] = d > 0 ? d : 0.0;  // clip scaled noise below zero
        }
        double obj = 0.0;
        for (int j = 0; j < n_; ++j) obj += out.primal[j] * cost_[j];
        out.objective = obj / obj_scale_;
        return out;
    }

  private:
    enum class Outcome { optimal, unbounded, iteration_limit };

    size_t idx(int r, int c) const { return static_cast<size_t>(r) * m_ + c; }

    double cost_of(int col, bool phase1) const {
        if (phase1) return col >= n_ + m_ ? -1.0 : 0.0;
        if (col < n_) return cost_[col];
        return 0.0;  // slacks and leftover artificials
    }

    std::vector<double> dual_internal(bool phase1) const {
        std::vector<double> y(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            double cb = cost_of(basis_[i], phase1);
            if (cb == 0.0) continue;
            const double* row = &binv_[idx(i, 0)];
            for (int k = 0; k < m_; ++k) y[k] += cb * row[k];
        }
        return y;
    }

    // w = B^-1 * a_col
    void ftran(int col, std::vector<double>& w) const {
        w.assign(m_, 0.0);
        if (col < n_) {
            for (auto [r, v] : cols_[col]) {
                const size_t base = static_cast<size_t>(r);
                for (int i = 0; i < m_; ++i) w[i] += binv_[idx(i, 0) + base] * v;
            }
        } else if (col < n_ + m_) {
            int r = col - n_;
            double v = row_sign_[r] < 0 ? -1.0 : 1.0;
            for (int i = 0; i < m_; ++i) w[i] = binv_[idx(i, r)] * v;
        } else {
            int r = col - n_ - m_;
            for (int i = 0; i < m_; ++i) w[i] = binv_[idx(i, r)];
        }
    }

    double reduced_cost(int col, const std::vector<double>& y, bool phase1) const {
        double d = cost_of(col, phase1);
        if (col < n_) {
            for (auto [r, v] : cols_[col]) d -= y[r] * v;
        } else if (col < n_ + m_) {
            int r = col - n_;
            d -= y[r] * (row_sign_[r] < 0 ? -1.0 : 1.0);
        } else {
            d -= y[col - n_ - m_];
        }
        return d;
    }

    Outcome iterate(bool phase1, long iter_limit, long& iters) {
        std::vector<char> in_basis(n_ + 2 * m_, 0);
        for (int b : basis_) in_basis[b] = 1;
        int degenerate_streak = 0;
        std::vector<double> w;
        while (true) {
            if (iters >= iter_limit) return Outcome::iteration_limit;
            ++iters;
            std::vector<double> y = dual_internal(phase1);
            bool bland = degenerate_streak > kBlandStreak;
            int entering = -1;
            double best = kReducedCostTol;
            for (int j = 0; j < n_ + m_; ++j) {  // artificials never re-enter
                if (in_basis[j]) continue;
                double d = reduced_cost(j, y, phase1);
                if (d > best) {
                    entering = j;
                    if (bland) break;
                    best = d;
                }
            }
            if (entering < 0) return Outcome::optimal;

            ftran(entering, w);
            int leave = -1;
            double theta = 0.0;
            for (int i = 0; i < m_; ++i) {
                if (w[i] <= kPivotTol) continue;
                double ratio = xb_[i] / w[i];
                if (leave < 0 || ratio < theta - 1e-12 ||
                    (ratio < theta + 1e-12 &&
                     (bland ? basis_[i] < basis_[leave] : w[i] > w[leave]))) {
                    leave = i;
                    theta = ratio;
                }
            }
            if (leave < 0) {
                return phase1 ? Outcome::optimal : Outcome::unbounded;
            }
            degenerate_streak = theta < 1e-10 ? degenerate_streak + 1 : 0;
            in_basis[basis_[leave]] = 0;
            pivot(entering, leave, w, theta);
            in_basis[entering] = 1;
        }
    }

    void pivot(int entering, int leave, const std::vector<double>& w, double theta) {
        double piv = w[leave];
        double* prow = &binv_[idx(leave, 0)];
        for (int k = 0; k < m_; ++k) prow[k] /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == leave) continue;
            double f = w[i];
            if (f == 0.0) continue;
            double* row = &binv_[idx(i, 0)];
            for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
            xb_[i] -= f * theta;
            if (xb_[i] < 0 && xb_[i] > -1e-11) xb_[i] = 0;
        }
        xb_[leave] = theta;
        basis_[leave] = entering;
    }

    // After phase 1, swap 0-level artificials for any usable real column.
    void expel_artificials() {
        std::vector<double> w;
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < n_ + m_) continue;
            int replacement = -1;
            for (int j = 0; j < n_ + m_ && replacement < 0; ++j) {
                bool basic = false;
                for (int b : basis_) {
                    if (b == j) { basic = true; break; }
                }
                if (basic) continue;
                ftran(j, w);
                if (std::abs(w[i]) > 1e-7) replacement = j;
            }
            if (replacement >= 0) {
                ftran(replacement, w);
                pivot(replacement, i, w, xb_[i] / w[i]);
            }
        }
    }

    int m_;
    int n_;
    double obj_scale_ = 1.0;
    std::vector<double> row_scale_;
    std::vector<double> row_sign_;
    std::vector<double> b_;
    std::vector<double> cost_;
    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> binv_;
    std::vector<double> xb_;
    std::vector<int> basis_;
};

} // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    for (const LpColumn& c : lp.columns) {
        for (auto [r, v] : c.entries) {
            if (r < 0 || r >= lp.num_rows()) throw std::invalid_argument("column entry row out of range");
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite coefficient");
        }
        if (!std::isfinite(c.objective)) throw std::invalid_argument("non-finite objective");
    }
    for (double b : lp.rhs) {
        if (!std::isfinite(b)) throw std::invalid_argument("non-finite rhs");
    }
    Simplex s(lp);
    long limit = 1000 + 50L * (lp.num_rows() + lp.num_cols());
    return s.run(limit);
}

namespace {

struct BbNode {
    std::vector<std::pair<int, bool>> fixes;
    double bound = 0.0;
};

// Sub-LP with fixed columns substituted out and x <= 1 rows for the free ones.
LpSolution solve_node(const LinearProgram& lp, const std::vector<int>& state, double& obj_const,
                      std::vector<int>& col_map) {
    const int n = lp.num_cols();
    LinearProgram sub;
    sub.rhs = lp.rhs;
    sub.row_labels.assign(lp.num_rows(), "");
    obj_const = 0.0;
    col_map.clear();
    for (int j = 0; j < n; ++j) {
        if (state[j] == 1) {
            obj_const += lp.columns[j].objective;
            for (auto [r, v] : lp.columns[j].entries) sub.rhs[r] -= v;
        }
    }
    for (int j = 0; j < n; ++j) {
        if (state[j] != -1) continue;
        LpColumn c = lp.columns[j];
        int ub_row = sub.add_row("", 1.0);
        c.entries.push_back({ub_row, 1.0});
        sub.add_column(std::move(c));
        col_map.push_back(j);
    }
    return solve_lp(sub);
}

} // namespace

IntegerSolveResult solve_ip_exact(const LinearProgram& lp, const IpOptions& opts) {
    const int n = lp.num_cols();
    for (const LpColumn& c : lp.columns) {
        if (!c.binary) throw std::invalid_argument("solve_ip_exact requires binary columns");
    }
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(opts.time_limit_s));

    IntegerSolveResult res;
    res.incumbent.assign(n, 0);

    auto feasible = [&lp, n](const std::vector<std::uint8_t>& x) {
        for (int i = 0; i < lp.num_rows(); ++i) {
            double load = 0.0;
            for (int j = 0; j < n; ++j) {
                if (!x[j]) continue;
                for (auto [r, v] : lp.columns[j].entries) {
                    if (r == i) load += v;
                }
            }
            if (load > lp.rhs[i] + kLpFeasTol * (1.0 + std::abs(lp.rhs[i]))) return false;
        }
        return true;
    };
    auto objective_of = [&lp, n](const std::vector<std::uint8_t>& x) {
        double z = 0.0;
        for (int j = 0; j < n; ++j) {
            if (x[j]) z += lp.columns[j].objective;
        }
        return z;
    };

    // x = 0 is feasible whenever b >= 0; otherwise wait for a node to prove one.
    bool zero_ok = true;
    for (double b : lp.rhs) zero_ok = zero_ok && b >= -kLpFeasTol;
    if (zero_ok) {
        res.has_incumbent = true;
        res.objective = 0.0;
    }
    if (opts.warm_start && static_cast<int>(opts.warm_start->size()) == n &&
        feasible(*opts.warm_start)) {
        double z = objective_of(*opts.warm_start);
        if (!res.has_incumbent || z > res.objective) {
            res.incumbent = *opts.warm_start;
            res.objective = z;
            res.has_incumbent = true;
        }
    }

    std::vector<BbNode> open;
    open.push_back({{}, std::numeric_limits<double>::infinity()});
    std::vector<int> state(n);
    std::vector<int> col_map;
    double prune_tol = 1e-9;
    bool hit_limit = false;
    long resort_counter = 0;

    while (!open.empty()) {
        if (std::chrono::steady_clock::now() > deadline ||
            (opts.max_nodes > 0 && res.nodes >= opts.max_nodes)) {
            hit_limit = true;
            break;
        }
        BbNode node = std::move(open.back());
        open.pop_back();
        if (res.has_incumbent &&
            node.bound <= res.objective + prune_tol * (1.0 + std::abs(res.objective))) {
            continue;
        }
        ++res.nodes;
        if (++resort_counter >= 1000) {
            resort_counter = 0;
            std::sort(open.begin(), open.end(),
                      [](const BbNode& a, const BbNode& b) { return a.bound < b.bound; });
        }

        std::fill(state.begin(), state.end(), -1);
        for (auto [j, v] : node.fixes) state[j] = v ? 1 : 0;
        double obj_const = 0.0;
        LpSolution rel = solve_node(lp, state, obj_const, col_map);
        if (rel.status == LpStatus::infeasible) continue;
        if (rel.status != LpStatus::optimal) continue;  // limit statuses: drop, bound stays via parent
        double bound = rel.objective + obj_const;
        if (res.has_incumbent &&
            bound <= res.objective + prune_tol * (1.0 + std::abs(res.objective))) {
            continue;
        }

        int branch = -1;
        double branch_frac = -1.0;
        for (size_t k = 0; k < col_map.size(); ++k) {
            double v = rel.primal[k];
            double frac = std::min(v, 1.0 - v);
            if (frac > 1e-6 && frac > branch_frac) {
                branch_frac = frac;
                branch = static_cast<int>(k);
            }
        }
        if (branch < 0) {
            // integral relaxation: candidate incumbent
            std::vector<std::uint8_t> x(n, 0);
            for (auto [j, v] : node.fixes) x[j] = v ? 1 : 0;
            for (size_t k = 0; k < col_map.size(); ++k) {
                x[col_map[k]] = rel.primal[k] > 0.5 ? 1 : 0;
            }
            if (feasible(x)) {
                double z = objective_of(x);
                if (!res.has_incumbent || z > res.objective) {
                    res.incumbent = std::move(x);
                    res.objective = z;
                    res.has_incumbent = true;
                }
                continue;
            }
            // numerically integral yet infeasible after rounding: force a split
            for (size_t k = 0; k < col_map.size() && branch < 0; ++k) {
                if (state[col_map[k]] == -1) branch = static_cast<int>(k);
            }
            if (branch < 0) continue;
        }

        int var = col_map[branch];
        BbNode zero{node.fixes, bound};
        zero.fixes.push_back({var, false});
        BbNode one{std::move(node.fixes), bound};
        one.fixes.push_back({var, true});
        open.push_back(std::move(zero));
        open.push_back(std::move(one));  // explored first
    }

    double open_bound = res.has_incumbent ? res.objective : 0.0;
    for (const BbNode& nd : open) open_bound = std::max(open_bound, nd.bound);
    if (hit_limit && !open.empty()) {
        res.status = IpStatus::time_limit;
        res.best_bound = open_bound;
    } else {
        res.status = res.has_incumbent ? IpStatus::optimal : IpStatus::infeasible;
        res.best_bound = res.has_incumbent ? res.objective : 0.0;
    }
    return res;
}

void write_mps(const LinearProgram& lp, std::ostream& out, const std::string& name) {
    out << "NAME          " << name << "\n";
    out << "ROWS\n N  COST\n";
    for (int i = 0; i < lp.num_rows(); ++i) {
        out << " L  R" << i << "\n";
    }
    out << "COLUMNS\n";
    out << std::setprecision(12);
    for (int j = 0; j < lp.num_cols(); ++j) {
        std::string cn = "C" + std::to_string(j);
        out << "    " << cn << "  COST  " << lp.columns[j].objective << "\n";
        for (auto [r, v] : lp.columns[j].entries) {
            out << "    " << cn << "  R" << r << "  " << v << "\n";
        }
    }
    out << "RHS\n";
    for (int i = 0; i < lp.num_rows(); ++i) {
        out << "    RHS  R" << i << "  " << lp.rhs[i] << "\n";
    }
    out << "BOUNDS\n";
    for (int j = 0; j < lp.num_cols(); ++j) {
        if (lp.columns[j].binary) out << " BV BND  C" << j << "\n";
    }
    out << "ENDATA\n";
}

} // namespace dldn
