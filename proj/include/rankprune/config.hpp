#pragma once
// Flat `key = value` experiment configuration. Blank lines and `#` comments
// are ignored; unknown keys are rejected.
//
//   axis    = d | dim | n | noise_frac
//   values  = 1,2,3
//   pairs   = 0:0,0.5:0.5        (pi1:rho1)
//   methods = RP,RP_rho,naive,truth
// plus the scalar fields of SynthConfig and FitConfig (d, dim, n, p_y1,
// noise_frac, trials, seed, cv_k, max_iters, tolerance, reg_inverse_c,
// learning_rate, threads).

#include <iosfwd>
#include <string>

#include "rankprune/synthetic_bench.hpp"

namespace rankprune {

// Throws ConfigError on syntax problems; feasibility is checked by
// SweepSpec::validate().
SweepSpec parse_sweep_config(std::istream& in);
SweepSpec read_sweep_config(const std::string& path);

std::string format_sweep_config(const SweepSpec& spec);

}  // namespace rankprune
