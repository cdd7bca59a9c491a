#pragma once

#include "instances.hpp"

namespace testsupport = detline::instances;
