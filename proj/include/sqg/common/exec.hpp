#pragma once

namespace sqg {

// Every data-parallel kernel ships a serial reference path. The parallel path
// uses OpenMP and must reproduce the serial result (bit-exactly for exact
// arithmetic, to round-off for floating reductions).
enum class Exec { serial, parallel };

}  // namespace sqg
