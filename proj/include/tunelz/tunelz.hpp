#pragma once

#include "tunelz/abc.hpp"
#include "tunelz/baseline.hpp"
#include "tunelz/corpus.hpp"
#include "tunelz/lz.hpp"
#include "tunelz/rational.hpp"
#include "tunelz/token_format.hpp"
