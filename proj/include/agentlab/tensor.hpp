#pragma once
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace agentlab {

// Dense row-major double tensor. Everything in the engine is small
// (largest parameter is a few tens of KB) so simplicity wins over cleverness.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;

    static Tensor zeros(std::vector<int> shp) {
        Tensor t;
        t.shape = std::move(shp);
        t.data.assign(numel_of(t.shape), 0.0);
        return t;
    }

    static Tensor full(std::vector<int> shp, double v) {
        Tensor t = zeros(std::move(shp));
        for (auto& x : t.data) x = v;
        return t;
    }

    static Tensor from(std::vector<double> vals) {
        Tensor t;
        t.shape = {static_cast<int>(vals.size())};
        t.data = std::move(vals);
        return t;
    }

    static Tensor from(std::vector<double> vals, std::vector<int> shp) {
        Tensor t;
        t.shape = std::move(shp);
        t.data = std::move(vals);
        return t;
    }

    int numel() const { return static_cast<int>(data.size()); }

    static int numel_of(const std::vector<int>& shp) {
        int n = 1;
        for (int d : shp) n *= d;
        return n;
    }

    double& operator[](int i) { return data[static_cast<size_t>(i)]; }
    double operator[](int i) const { return data[static_cast<size_t>(i)]; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

std::string shape_str(const std::vector<int>& shp);

}  // namespace agentlab
