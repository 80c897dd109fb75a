#include "mmsvc/plant.hpp"

#include "mmsvc/error.hpp"

namespace mmsvc {

PowerReadout Plant::powers() const {
    return {Vector::Zero(channels()), Vector::Zero(channels())};
}

void Plant::apply_load_step(std::size_t /*load_index*/, double /*factor*/) {
    fail(ErrorCategory::invalid_argument, "this plant has no load model");
}

} // namespace mmsvc
