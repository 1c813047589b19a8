#pragma once

// Everything except the command-line front end.

#include "ctkb/bench.hpp"
#include "ctkb/oracle.hpp"
