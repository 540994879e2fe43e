#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "dstp/array.hpp"
#include "dstp/tape.hpp"

namespace dstp {

/**
 * Named learnable arrays with paired gradient and Adam-moment slots.
 * Entry order is the registration order and defines the checkpoint payload
 * order, so it must be deterministic for a given ModelConfig.
 */
class ParameterStore {
public:
    struct Entry {
        std::string name;
        Array value;
        Array grad;
        Array moment1;
        Array moment2;
    };

    void add(const std::string& name, Array init) {
        if (index_.count(name)) throw ConfigError("parameter registered twice: " + name);
        Entry e;
        e.name = name;
        e.grad = Array::zeros(init.shape);
        e.moment1 = Array::zeros(init.shape);
        e.moment2 = Array::zeros(init.shape);
        e.value = std::move(init);
        index_[name] = entries_.size();
        entries_.push_back(std::move(e));
    }

    Entry& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
        return entries_[it->second];
    }
    const Entry& at(const std::string& name) const {
        return const_cast<ParameterStore*>(this)->at(name);
    }
    bool has(const std::string& name) const { return index_.count(name) != 0; }

    std::vector<Entry>& entries() { return entries_; }
    const std::vector<Entry>& entries() const { return entries_; }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& e : entries_) n += e.value.size();
        return n;
    }

    void zero_grads() {
        for (auto& e : entries_)
            std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
    }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

/**
 * Per-tape binding of a ParameterStore: each parameter becomes a leaf node.
 * After Tape::backward, accumulate() folds the leaf gradients back into the
 * store's gradient slots.
 */
class BoundParams {
public:
    BoundParams(Tape& tape, ParameterStore& store) : tape_(tape), store_(store) {
        ids_.reserve(store.entries().size());
        for (auto& e : store.entries()) {
            NodeId id = tape.leaf(e.value);
            by_name_[e.name] = id;
            ids_.push_back(id);
        }
    }

    NodeId operator[](const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) throw ConfigError("unknown parameter: " + name);
        return it->second;
    }

    void accumulate() {
        auto& es = store_.entries();
        for (std::size_t i = 0; i < es.size(); ++i) {
            const Array& g = tape_.grad(ids_[i]);
            for (std::size_t j = 0; j < g.size(); ++j) es[i].grad.data[j] += g.data[j];
        }
    }

private:
    Tape& tape_;
    ParameterStore& store_;
    std::vector<NodeId> ids_;
    std::unordered_map<std::string, NodeId> by_name_;
};

/// Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] initialization.
inline Array init_uniform(std::vector<std::size_t> shape, std::size_t fan_in,
                          std::mt19937_64& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Array a = Array::zeros(std::move(shape));
    for (double& v : a.data) v = dist(rng);
    return a;
}

}  // namespace dstp
