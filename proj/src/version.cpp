#include "weakseg/version.hpp"

#ifndef WEAKSEG_VERSION
#define WEAKSEG_VERSION "0.0.0"
#endif

namespace weakseg {

const char* version() noexcept { return WEAKSEG_VERSION; }

}  // namespace weakseg
