this.addScript("init", "app.alert(1)");
