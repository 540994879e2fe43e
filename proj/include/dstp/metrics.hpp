#pragma once

#include <cmath>
#include <vector>

#include "dstp/errors.hpp"

namespace dstp {

inline double rmse(const std::vector<double>& preds, const std::vector<double>& truths) {
    if (preds.empty() || preds.size() != truths.size())
        throw ContractError("rmse: need equal-length non-empty inputs");
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        double d = preds[i] - truths[i];
        total += d * d;
    }
    return std::sqrt(total / static_cast<double>(preds.size()));
}

inline double mae(const std::vector<double>& preds, const std::vector<double>& truths) {
    if (preds.empty() || preds.size() != truths.size())
        throw ContractError("mae: need equal-length non-empty inputs");
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) total += std::abs(preds[i] - truths[i]);
    return total / static_cast<double>(preds.size());
}

}  // namespace dstp
