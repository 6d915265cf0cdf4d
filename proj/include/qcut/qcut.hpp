#pragma once

#include "qcut/channel.hpp"
#include "qcut/errors.hpp"
#include "qcut/experiments.hpp"
#include "qcut/fidelity.hpp"
#include "qcut/haar.hpp"
#include "qcut/linalg.hpp"
#include "qcut/povm.hpp"
#include "qcut/rational.hpp"
#include "qcut/rng.hpp"
