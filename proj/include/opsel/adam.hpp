#ifndef OPSEL_ADAM_HPP
#define OPSEL_ADAM_HPP

#include "opsel/network.hpp"

namespace opsel {

/**
 * Adam with bias correction. Moment buffers mirror the parameter arrays;
 * step() applies one update in place.
 */
class Adam {
public:
    Adam(const Parameters& params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step(Parameters& params, const Parameters& grads);
    int steps_taken() const { return t_; }
    double learning_rate() const { return lr_; }

private:
    Parameters m_;
    Parameters v_;
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
};

}  // namespace opsel

#endif
