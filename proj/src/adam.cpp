#include "opsel/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace opsel {

Adam::Adam(const Parameters& params, double lr, double beta1, double beta2, double eps)
    : m_(zeros_like(params)), v_(zeros_like(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
}

void Adam::step(Parameters& params, const Parameters& grads) {
    if (params.arrays.size() != grads.arrays.size())
        throw std::invalid_argument("gradient structure does not match parameters");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t a = 0; a < params.arrays.size(); ++a) {
        Matrix& p = params.arrays[a].value;
        const Matrix& g = grads.arrays[a].value;
        Matrix& m = m_.arrays[a].value;
        Matrix& v = v_.arrays[a].value;
        if (p.size() != g.size()) throw std::invalid_argument("gradient shape mismatch at " + params.arrays[a].name);
        double* pd = p.data();
        const double* gd = g.data();
        double* md = m.data();
        double* vd = v.data();
        for (std::size_t i = 0; i < p.size(); ++i) {
            md[i] = beta1_ * md[i] + (1.0 - beta1_) * gd[i];
            vd[i] = beta2_ * vd[i] + (1.0 - beta2_) * gd[i] * gd[i];
            const double mhat = md[i] / bc1;
            const double vhat = vd[i] / bc2;
            pd[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

}  // namespace opsel
