#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rme {

// Dense row-major float32 tensor. All learned parameters and map payloads
// use this one container; shape is carried explicitly.
struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::uint32_t> d) : dims(std::move(d)) {
        data.assign(element_count(dims), 0.0f);
    }

    static std::size_t element_count(const std::vector<std::uint32_t>& d) {
        std::size_t n = 1;
        for (auto v : d) n *= v;
        return n;
    }

    std::size_t size() const { return data.size(); }

    float& at(std::size_t i) { return data[i]; }
    float at(std::size_t i) const { return data[i]; }
};

struct MissingWeightError : std::runtime_error {
    explicit MissingWeightError(const std::string& name)
        : std::runtime_error("missing weight tensor: " + name) {}
};

struct ModelFormatError : std::runtime_error {
    explicit ModelFormatError(const std::string& what) : std::runtime_error(what) {}
};

// Named parameter store for every network in the engine. std::map keeps the
// iteration (and serialization) order deterministic.
struct NetParams {
    std::map<std::string, Tensor> tensors;
    int d_z = 256;
    int d_f = 32;

    bool has(const std::string& name) const { return tensors.count(name) > 0; }

    const Tensor& at(const std::string& name) const {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw MissingWeightError(name);
        return it->second;
    }

    Tensor& emplace(const std::string& name, std::vector<std::uint32_t> dims) {
        auto [it, fresh] = tensors.emplace(name, Tensor(std::move(dims)));
        if (!fresh) throw ModelFormatError("duplicate tensor name: " + name);
        return it->second;
    }

    void expect_shape(const std::string& name, const std::vector<std::uint32_t>& dims) const {
        const Tensor& t = at(name);
        if (t.dims != dims) {
            std::string want, got;
            for (auto d : dims) want += std::to_string(d) + ",";
            for (auto d : t.dims) got += std::to_string(d) + ",";
            throw ModelFormatError("tensor " + name + " has shape [" + got +
                                   "] but the declared architecture wants [" + want + "]");
        }
    }
};

} // namespace rme
