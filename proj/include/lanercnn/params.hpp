#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "lanercnn/tensor.hpp"
#include "lanercnn/util.hpp"

namespace lanercnn {

// Named parameter tensors in a fixed registration order. The order defines
// init, optimizer iteration and checkpoint layout, so it must be deterministic.
class ParamStore {
public:
    ad::Tensor create(const std::string& name, ad::Shape shape, Rng& rng,
                      double init_bound);
    ad::Tensor create_const(const std::string& name, ad::Shape shape, double v);

    ad::Tensor get(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.count(name) > 0; }

    size_t count() const { return params_.size(); }
    int64_t total_elements() const;

    const std::vector<std::string>& names() const { return names_; }
    std::vector<ad::Tensor>& tensors() { return params_; }
    const std::vector<ad::Tensor>& tensors() const { return params_; }

    void zero_grads();
    uint64_t value_checksum() const;

private:
    ad::Tensor add(const std::string& name, ad::Tensor t);

    std::vector<std::string> names_;
    std::vector<ad::Tensor> params_;
    std::map<std::string, size_t> index_;
};

// Uniform(-bound, bound) init with bound = sqrt(1/fan_in).
inline double fan_in_bound(int64_t fan_in) {
    return std::sqrt(1.0 / static_cast<double>(fan_in));
}

}  // namespace lanercnn
