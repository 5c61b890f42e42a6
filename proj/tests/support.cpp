#include "support.hpp"

#include <unistd.h>

namespace testing {

long TempDir::getpid_wrapper() { return static_cast<long>(::getpid()); }

}  // namespace testing
