var annots = this.getAnnots({ nPage: 0 });
if (annots)
    app.alert(annots.length);
