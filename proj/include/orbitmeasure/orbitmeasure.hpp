#pragma once

#include "orbitmeasure/config.hpp"
#include "orbitmeasure/ensemble.hpp"
#include "orbitmeasure/errors.hpp"
#include "orbitmeasure/instances.hpp"
#include "orbitmeasure/lie.hpp"
#include "orbitmeasure/linalg.hpp"
#include "orbitmeasure/parallel.hpp"
#include "orbitmeasure/report.hpp"
#include "orbitmeasure/suite.hpp"
#include "orbitmeasure/validation.hpp"
