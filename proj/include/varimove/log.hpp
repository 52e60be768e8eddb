#pragma once

namespace varimove {

/// Configures the library logger from VARIMOVE_LOG (trace, debug, info, warn,
/// error, off). Unset means warn. Safe to call more than once.
void init_logging();

}  // namespace varimove
