#pragma once

#include "kpn/bench.hpp"
#include "kpn/csv.hpp"
#include "kpn/distributions.hpp"
#include "kpn/epmgp.hpp"
#include "kpn/estimators.hpp"
#include "kpn/knn.hpp"
#include "kpn/quadrature.hpp"
#include "kpn/rng.hpp"
#include "kpn/sample_set.hpp"
#include "kpn/special_functions.hpp"
#include "kpn/spd_matrix.hpp"
#include "kpn/symmetric_eigen.hpp"
#include "kpn/truncated_normal.hpp"
