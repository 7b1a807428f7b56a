namespace lpb {}
