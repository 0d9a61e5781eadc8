#pragma once

#include "coreset/config.hpp"
#include "coreset/dimreduce.hpp"
#include "coreset/error.hpp"
#include "coreset/io.hpp"
#include "coreset/kmedian_coreset.hpp"
#include "coreset/linalg.hpp"
#include "coreset/oracle/brute_force.hpp"
#include "coreset/oracle/harness.hpp"
#include "coreset/parallel.hpp"
#include "coreset/random.hpp"
#include "coreset/sketching.hpp"
#include "coreset/subspace_coreset.hpp"
