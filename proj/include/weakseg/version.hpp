#pragma once

namespace weakseg {

/// Build version, e.g. "0.1.0".
const char* version() noexcept;

}  // namespace weakseg
