var now = new Date();
this.getField("date").value = util.printd("yyyy-mm-dd", now);
