#pragma once

#include <stdexcept>
#include <string>

namespace swcnn {

// Every recoverable failure in the library surfaces as swcnn::Error with a
// message that names the offending file, tensor or argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace swcnn
