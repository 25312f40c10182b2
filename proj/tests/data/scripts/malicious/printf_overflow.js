var fmt = "%45000.45000f";
util.printf(fmt, 0);
