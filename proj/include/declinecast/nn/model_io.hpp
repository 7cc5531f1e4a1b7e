#pragma once

#include <iosfwd>
#include <string>

#include "declinecast/errors.hpp"
#include "declinecast/nn/network.hpp"

namespace declinecast::nn {

inline constexpr int kModelFormatVersion = 1;

class ModelFormatError : public DataError {
public:
    using DataError::DataError;
};

// Text format: a header block (version, shapes, activations, dropout rates,
// trainable flags, scaler) followed by one line per weight row and one bias
// line per layer. Values use the shortest round-trip decimal form.
void write_model(std::ostream& out, const NetworkModel& model);
NetworkModel read_model(std::istream& in);

void save_model(const NetworkModel& model, const std::string& path);
NetworkModel load_model(const std::string& path);

}  // namespace declinecast::nn
