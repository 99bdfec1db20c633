#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pollcast {

enum class SelectionMethod : std::uint8_t { none, univariate, rfe };

std::string_view to_string(SelectionMethod m);

struct SelectionResult {
    SelectionMethod method = SelectionMethod::none;
    std::size_t k = 0;
    // Column indices into the input matrix, best first.
    std::vector<std::size_t> chosen;
    // One score per input column. Univariate: squared Pearson correlation.
    // RFE: elimination rank (k survivors share rank 1, the last dropped
    // column gets 2, and so on).
    std::vector<double> scores;
    // Every column scored 0 (univariate) so the pick fell back to column order.
    bool degenerate = false;
};

// ceil(10% of p), at least 1.
std::size_t auto_k(std::size_t p);

// Squared Pearson correlation of each column with y; constant columns score 0.
std::vector<double> correlation_scores(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

SelectionResult univariate_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t k);

// Recursive elimination driven by standardized OLS coefficients, one column
// per round.
SelectionResult rfe_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t k);

}  // namespace pollcast
