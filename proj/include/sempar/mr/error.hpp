#pragma once

#include <stdexcept>

namespace sempar::mr {

class MrSyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sempar::mr
