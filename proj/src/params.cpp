#include "lanercnn/params.hpp"

namespace lanercnn {

ad::Tensor ParamStore::add(const std::string& name, ad::Tensor t) {
    if (index_.count(name))
        throw RuntimeFailure("duplicate parameter name: " + name);
    index_[name] = params_.size();
    names_.push_back(name);
    params_.push_back(t);
    return t;
}

ad::Tensor ParamStore::create(const std::string& name, ad::Shape shape, Rng& rng,
                              double init_bound) {
    std::vector<double> data(static_cast<size_t>(ad::numel(shape)));
    for (double& v : data) v = rng.uniform(-init_bound, init_bound);
    return add(name, ad::Tensor::from(std::move(shape), std::move(data), true));
}

ad::Tensor ParamStore::create_const(const std::string& name, ad::Shape shape,
                                    double v) {
    return add(name, ad::Tensor::full(std::move(shape), v, true));
}

ad::Tensor ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        throw RuntimeFailure("unknown parameter name: " + name);
    return params_[it->second];
}

int64_t ParamStore::total_elements() const {
    int64_t n = 0;
    for (const auto& p : params_) n += p.size();
    return n;
}

void ParamStore::zero_grads() {
    for (auto& p : params_) p.zero_grad();
}

uint64_t ParamStore::value_checksum() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& p : params_)
        h = fnv1a64(p.data(), p.values().size() * sizeof(double), h);
    return h;
}

}  // namespace lanercnn
