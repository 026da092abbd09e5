#pragma once

#include "martensite/errors.hpp"
#include "martensite/tensor.hpp"
#include "martensite/material.hpp"
#include "martensite/grid.hpp"
#include "martensite/elasticity.hpp"
#include "martensite/evolution.hpp"
#include "martensite/diagnostics.hpp"
#include "martensite/runner.hpp"
#include "martensite/sharp_interface.hpp"
#include "martensite/config.hpp"
#include "martensite/io.hpp"
#include "martensite/initial_data.hpp"
#include "martensite/studies.hpp"
