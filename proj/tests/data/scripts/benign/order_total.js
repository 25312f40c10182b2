var qty = Number(this.getField("qty").value);
var price = Number(this.getField("price").value);
var total = qty * price;
if (isNaN(total))
    total = 0;
this.getField("total").value = total.toFixed(2);
