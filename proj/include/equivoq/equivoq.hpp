#pragma once

#include "equivoq/errors.hpp"
#include "equivoq/parallel.hpp"
#include "equivoq/prob.hpp"
#include "equivoq/rate_distortion.hpp"
#include "equivoq/logloss.hpp"
#include "equivoq/secrecy.hpp"
#include "equivoq/aux_grid.hpp"
#include "equivoq/aux_ascent.hpp"
#include "equivoq/characterization.hpp"
#include "equivoq/oracle.hpp"
