#pragma once

#include "redact/anonymize.hpp"
#include "redact/association.hpp"
#include "redact/evaluation.hpp"
#include "redact/geometry.hpp"
#include "redact/image.hpp"
#include "redact/rpn.hpp"
#include "redact/selftest.hpp"
#include "redact/smoother.hpp"
#include "redact/streams.hpp"
#include "redact/synth.hpp"
