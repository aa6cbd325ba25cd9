#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dldn {

// Tolerances used throughout the solver. Data is row-scaled internally so
// these apply to well-conditioned systems.
inline constexpr double kLpFeasTol = 1e-7;   // primal/dual feasibility
inline constexpr double kLpGapTol = 1e-6;    // strong-duality gap
inline constexpr double kLpCsTol = 1e-6;     // complementary slackness

struct LpColumn {
    std::string label;
    double objective = 0.0;
    bool binary = false;  // eligible for 0-1 rounding; bounds enforced by the IP solver
    std::vector<std::pair<int, double>> entries;  // sparse (row, coefficient)
};

// max c.x  s.t.  A.x <= b,  x >= 0
struct LinearProgram {
    std::vector<double> rhs;
    std::vector<std::string> row_labels;
    std::vector<LpColumn> columns;

    int num_rows() const { return static_cast<int>(rhs.size()); }
    int num_cols() const { return static_cast<int>(columns.size()); }
    int add_row(const std::string& label, double b);
    int add_column(LpColumn col);
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
    LpStatus status = LpStatus::iteration_limit;
    double objective = 0.0;
    std::vector<double> primal;  // per column
    std::vector<double> duals;   // per row, >= 0
    long iterations = 0;
};

LpSolution solve_lp(const LinearProgram& lp);

const char* to_string(LpStatus s);

enum class IpStatus { optimal, time_limit, infeasible };

struct IntegerSolveResult {
    IpStatus status = IpStatus::infeasible;
    std::vector<std::uint8_t> incumbent;  // per column, 0/1
    double objective = 0.0;               // Z of the incumbent
    double best_bound = 0.0;              // valid upper bound on any 0-1 solution
    long nodes = 0;
    bool has_incumbent = false;
};

struct IpOptions {
    double time_limit_s = 60.0;
    long max_nodes = 0;  // 0 = unlimited
    const std::vector<std::uint8_t>* warm_start = nullptr;
};

// Depth-first branch and bound over binary columns, LP bounds from solve_lp.
// Branches on the most fractional variable; the open-node list is re-sorted
// by bound every 1000 nodes.
IntegerSolveResult solve_ip_exact(const LinearProgram& lp, const IpOptions& opts = {});

// Fixed-format MPS dump for cross-checking against external solvers.
void write_mps(const LinearProgram& lp, std::ostream& out, const std::string& name = "DLDN");

} // namespace dldn
