this.exportDataObject({ cName: "invoice.exe", nLaunch: 2 });
