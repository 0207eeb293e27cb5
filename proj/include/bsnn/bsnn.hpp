#ifndef BSNN_BSNN_HPP_
#define BSNN_BSNN_HPP_

#include "bsnn/bayes.hpp"
#include "bsnn/bern.hpp"
#include "bsnn/convert.hpp"
#include "bsnn/fxp.hpp"
#include "bsnn/metrics.hpp"
#include "bsnn/modelio.hpp"
#include "bsnn/netcore.hpp"
#include "bsnn/perfmodel.hpp"
#include "bsnn/prng.hpp"
#include "bsnn/sampler.hpp"
#include "bsnn/train_toy.hpp"

#endif  // BSNN_BSNN_HPP_
